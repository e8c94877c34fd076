/// Bundled scenarios, in the order `presets` lists them.
pub const PRESETS: &[(&str, &str)] = &[
    ("dephasing", include_str!("../scenarios/dephasing.ini")),
    ("spontaneous_emission", include_str!("../scenarios/spontaneous_emission.ini")),
    ("bit_flip", include_str!("../scenarios/bit_flip.ini")),
    ("fig1", include_str!("../scenarios/fig1.ini")),
    ("fig2", include_str!("../scenarios/fig2.ini")),
    ("fig3", include_str!("../scenarios/fig3.ini")),
];

pub fn find(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
