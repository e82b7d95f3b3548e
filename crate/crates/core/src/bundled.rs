//! Example programs and configurations shipped with the analyzer.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bundled {
    /// File name, e.g. `str_alphabet2.u`.
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! bundle {
    ($dir:literal; $($name:literal),* $(,)?) => {
        &[$(Bundled { name: $name, text: include_str!(concat!("../../../", $dir, "/", $name)) }),*]
    };
}

pub const PROGRAMS: &[Bundled] = bundle!("programs/universal";
    "char_codes.u",
    "congruence_step.u",
    "countdown.u",
    "division.u",
    "functions.u",
    "greeting.u",
    "loop_counter.u",
    "max_abs.u",
    "modulo.u",
    "nested_loops.u",
    "relational_sum.u",
    "str_alphabet2.u",
    "straight_line.u",
    "string_concat.u",
    "string_index_oob.u",
);

pub const CONFIGS: &[Bundled] = bundle!("configs/universal";
    "congruences.json",
    "intervals.json",
    "intervals_congruences.json",
    "polyhedra.json",
    "straight_line.json",
    "string_powerset_intervals.json",
    "string_powerset_relational.json",
    "string_product_nonrel.json",
    "string_product_relational.json",
);

pub fn program(name: &str) -> Option<&'static str> {
    PROGRAMS.iter().find(|b| b.name == name).map(|b| b.text)
}

pub fn config(name: &str) -> Option<&'static str> {
    CONFIGS.iter().find(|b| b.name == name).map(|b| b.text)
}
