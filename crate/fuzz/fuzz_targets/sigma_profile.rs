#![no_main]

use libfuzzer_sys::fuzz_target;
use pencil_bec::discretize::SigmaProfile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(profile) = text.parse::<SigmaProfile>() {
        // the printed form parses back to the same profile
        let again: SigmaProfile = profile.to_string().parse().expect("display output must parse");
        assert_eq!(profile, again);
    }
});
