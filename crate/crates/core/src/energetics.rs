//! Energy-density, material-use and nuclear transfer-rate calculators.
//!
//! Physical units throughout (eV, kg, m, s). Every calculator is a pure
//! function; [`evaluate`] wraps them for declarative callers and tags each
//! value with its unit and a formula identifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Elementary charge, J/eV.
pub const JOULE_PER_EV: f64 = 1.602176e-19;
/// Avogadro constant, 1/mol.
pub const AVOGADRO: f64 = 6.02214e23;
pub const JOULE_PER_KWH: f64 = 3.6e6;
/// Reduced Planck constant, eV·s.
pub const HBAR_EV_S: f64 = 6.582e-16;
/// Nuclear magneton, eV/T.
pub const NUCLEAR_MAGNETON_EV_PER_T: f64 = 3.15e-8;
/// Wh per eV as used by the molecular battery formula.
pub const WH_PER_EV: f64 = 4.45e-23;
/// kg per atomic mass unit as used by the molecular battery formula.
pub const KG_PER_U: f64 = 1.661e-27;
/// J/eV divided by s/ps, as used by the power-density formula.
pub const POWER_FACTOR: f64 = 1.602e-7;

pub const DEFAULT_VOL_RATIO: f64 = 6.26e-12;
pub const DEFAULT_DELTA_E_EV: f64 = 23.8e6;
/// Transfer rate printed alongside the worked nuclear example, 1/s.
pub const PRINTED_NUCLEAR_RATE: f64 = 1e-34;

/// Standard atomic weights (g/mol) for the elements the mixtures need.
const ELEMENTS: &[(&str, f64)] = &[
    ("H", 1.008),
    ("Li", 6.94),
    ("C", 12.011),
    ("N", 14.007),
    ("O", 15.999),
    ("Si", 28.085),
    ("Ta", 180.947),
];

pub fn atomic_weight(symbol: &str) -> Option<f64> {
    ELEMENTS.iter().find(|(s, _)| *s == symbol).map(|(_, w)| *w)
}

fn check(name: &str, v: f64, allow_zero: bool) -> Result<f64> {
    let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
    if ok {
        Ok(v)
    } else {
        let bound = if allow_zero { "non-negative" } else { "positive" };
        Err(Error::InvalidInput(format!("{name} must be finite and {bound}, got {v}")))
    }
}

/// One element of a mixture, weighted by mass fraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub element: String,
    pub mass_fraction: f64,
}

/// Molar-mass basis of an energy-density conversion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MolarMass {
    /// g/mol
    Value(f64),
    Composition(Vec<Component>),
}

impl MolarMass {
    /// Mass in g/mol; mixtures use the mass-fraction-weighted mean of the
    /// component atomic weights.
    pub fn grams_per_mol(&self) -> Result<f64> {
        match self {
            MolarMass::Value(m) => check("molar_mass", *m, false),
            MolarMass::Composition(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidInput("mixture has no molar-mass basis".into()));
                }
                let mut total = 0.0;
                let mut mass = 0.0;
                for p in parts {
                    let w = atomic_weight(&p.element)
                        .ok_or_else(|| Error::InvalidInput(format!("unknown element `{}`", p.element)))?;
                    let f = check("mass_fraction", p.mass_fraction, false)?;
                    total += f;
                    mass += f * w;
                }
                if (total - 1.0).abs() > 1e-6 {
                    return Err(Error::InvalidInput(format!("mass fractions sum to {total}, expected 1")));
                }
                Ok(mass)
            }
        }
    }
}

/// eV per atom (or formula unit) to kWh/kg.
pub fn ev_per_atom_to_kwh_per_kg(energy_ev: f64, molar_mass: &MolarMass) -> Result<f64> {
    let e = check("energy_per_atom", energy_ev, false)?;
    let m = molar_mass.grams_per_mol()?;
    Ok(e * JOULE_PER_EV * AVOGADRO / (m / 1000.0) / JOULE_PER_KWH)
}

/// Inverse of [`ev_per_atom_to_kwh_per_kg`].
pub fn kwh_per_kg_to_ev_per_atom(kwh_per_kg: f64, molar_mass: &MolarMass) -> Result<f64> {
    let e = check("energy_density", kwh_per_kg, false)?;
    let m = molar_mass.grams_per_mol()?;
    Ok(e * JOULE_PER_KWH * (m / 1000.0) / AVOGADRO / JOULE_PER_EV)
}

/// g/m² of absorber for a layer of `thickness_m` at `density_kg_m3`.
pub fn material_use_per_area(thickness_m: f64, density_kg_m3: f64) -> Result<f64> {
    Ok(check("thickness", thickness_m, true)? * check("density", density_kg_m3, true)? * 1000.0)
}

/// g per peak watt.
pub fn material_use_per_watt(areal_mass_g_m2: f64, area_m2: f64, peak_power_w: f64) -> Result<f64> {
    let p = check("peak_power", peak_power_w, false)?;
    Ok(check("areal_mass", areal_mass_g_m2, true)? * check("area", area_m2, true)? / p)
}

/// Wh/kg of a molecular battery storing `e_max_ev` per molecule of mass
/// `molecular_mass_u`.
pub fn battery_energy_density(e_max_ev: f64, molecular_mass_u: f64) -> Result<f64> {
    let a = check("molecular_mass", molecular_mass_u, false)?;
    Ok(check("e_max", e_max_ev, true)? * WH_PER_EV / (a * KG_PER_U))
}

/// kW/kg for a charging power `p_max` in eV/ps into `mass_kg`.
pub fn battery_power_density(p_max_ev_per_ps: f64, mass_kg: f64) -> Result<f64> {
    let m = check("mass", mass_kg, false)?;
    Ok(check("p_max", p_max_ev_per_ps, true)? * POWER_FACTOR / m / 1000.0)
}

/// `(4/3)π r³ / (2π² R₀ ΔR²)`.
pub fn vol_ratio(r_nuc_m: f64, r0_m: f64, delta_r_m: f64) -> Result<f64> {
    let r = check("r_nuc", r_nuc_m, true)?;
    let r0 = check("R0", r0_m, false)?;
    let dr = check("delta_R", delta_r_m, false)?;
    let pi = std::f64::consts::PI;
    Ok(4.0 / 3.0 * pi * r.powi(3) / (2.0 * pi * pi * r0 * dr * dr))
}

/// `μ·B` in eV.
pub fn magnetic_coupling(b_field_t: f64) -> Result<f64> {
    Ok(NUCLEAR_MAGNETON_EV_PER_T * check("b_field", b_field_t, true)?)
}

/// Inputs of the nuclear excitation-transfer rate. Give either `g_coupling`
/// (eV) or `b_field` (T).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuclearTransferInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_coupling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_field: Option<f64>,
    pub gamow_suppression: f64,
    #[serde(default = "default_vol_ratio")]
    pub vol_ratio: f64,
    #[serde(default = "default_delta_e")]
    pub delta_e: f64,
    pub n_donors: f64,
    pub n_acceptors: f64,
}

fn default_vol_ratio() -> f64 {
    DEFAULT_VOL_RATIO
}

fn default_delta_e() -> f64 {
    DEFAULT_DELTA_E_EV
}

impl NuclearTransferInput {
    /// The worked example: g = 1e-7 eV, e^−G = 1e-33, √vol_ratio = 1e-6,
    /// ΔE = 24 MeV, 1e12 donors, 1e6 acceptors.
    pub fn worked_example() -> Self {
        Self {
            g_coupling: Some(1e-7),
            b_field: None,
            gamow_suppression: 1e-33,
            vol_ratio: 1e-12,
            delta_e: 24e6,
            n_donors: 1e12,
            n_acceptors: 1e6,
        }
    }

    pub fn coupling(&self) -> Result<f64> {
        match (self.g_coupling, self.b_field) {
            (Some(g), None) => check("g_coupling", g, false),
            (None, Some(b)) => check("b_field", b, false).and_then(magnetic_coupling),
            _ => Err(Error::InvalidInput("give exactly one of g_coupling and b_field".into())),
        }
    }
}

/// `Γ = g e^−G √vol_ratio · g / ΔE · √N_D · √N_A / ħ` in 1/s.
pub fn nuclear_transfer_rate(input: &NuclearTransferInput) -> Result<f64> {
    let g = input.coupling()?;
    let gamow = check("gamow_suppression", input.gamow_suppression, false)?;
    let vol = check("vol_ratio", input.vol_ratio, false)?;
    if vol > 1.0 {
        return Err(Error::InvalidInput(format!("vol_ratio must not exceed 1, got {vol}")));
    }
    let de = check("delta_e", input.delta_e, false)?;
    let nd = check("n_donors", input.n_donors, false)?;
    let na = check("n_acceptors", input.n_acceptors, false)?;
    Ok(g * gamow * vol.sqrt() * g / de * nd.sqrt() * na.sqrt() / HBAR_EV_S)
}

/// Literal evaluation of the worked nuclear example against the printed figure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub literal: f64,
    pub printed: f64,
    /// `printed / literal`
    pub ratio: f64,
    /// `log10(printed / literal)`
    pub log10_gap: f64,
}

pub fn nuclear_discrepancy_report() -> DiscrepancyReport {
    let literal = nuclear_transfer_rate(&NuclearTransferInput::worked_example()).expect("worked example is valid");
    DiscrepancyReport {
        literal,
        printed: PRINTED_NUCLEAR_RATE,
        ratio: PRINTED_NUCLEAR_RATE / literal,
        log10_gap: (PRINTED_NUCLEAR_RATE / literal).log10(),
    }
}

/// Declarative calculator call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "snake_case", deny_unknown_fields)]
pub enum Calculator {
    #[serde(rename = "ev_to_kwh")]
    EvPerAtomToKwhPerKg {
        energy_per_atom: f64,
        molar_mass: MolarMass,
    },
    #[serde(rename = "kwh_to_ev")]
    KwhPerKgToEvPerAtom {
        energy_density: f64,
        molar_mass: MolarMass,
    },
    MaterialUsePerArea {
        thickness: f64,
        density: f64,
    },
    MaterialUsePerWatt {
        areal_mass: f64,
        area: f64,
        peak_power: f64,
    },
    BatteryEnergyDensity {
        e_max: f64,
        molecular_mass: f64,
    },
    BatteryPowerDensity {
        p_max: f64,
        mass: f64,
    },
    NuclearTransferRate(NuclearTransferInput),
    VolRatio {
        r_nuc: f64,
        #[serde(rename = "R0")]
        r0: f64,
        #[serde(rename = "delta_R")]
        delta_r: f64,
    },
    MagneticCoupling {
        b_field: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calculation {
    /// Formula identifier, as used in the `formula` tag.
    pub formula: String,
    pub value: f64,
    pub unit: String,
    pub expression: String,
    /// Present when the nuclear rate is evaluated on the worked example.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<DiscrepancyReport>,
}

impl Calculator {
    pub fn id(&self) -> &'static str {
        match self {
            Calculator::EvPerAtomToKwhPerKg { .. } => "ev_to_kwh",
            Calculator::KwhPerKgToEvPerAtom { .. } => "kwh_to_ev",
            Calculator::MaterialUsePerArea { .. } => "material_use_per_area",
            Calculator::MaterialUsePerWatt { .. } => "material_use_per_watt",
            Calculator::BatteryEnergyDensity { .. } => "battery_energy_density",
            Calculator::BatteryPowerDensity { .. } => "battery_power_density",
            Calculator::NuclearTransferRate(_) => "nuclear_transfer_rate",
            Calculator::VolRatio { .. } => "vol_ratio",
            Calculator::MagneticCoupling { .. } => "magnetic_coupling",
        }
    }
}

pub fn evaluate(calc: &Calculator) -> Result<Calculation> {
    let (value, unit, expression) = match calc {
        Calculator::EvPerAtomToKwhPerKg {
            energy_per_atom,
            molar_mass,
        } => (
            ev_per_atom_to_kwh_per_kg(*energy_per_atom, molar_mass)?,
            "kWh/kg",
            "E_eV * e * N_A / (M / 1000) / 3.6e6",
        ),
        Calculator::KwhPerKgToEvPerAtom {
            energy_density,
            molar_mass,
        } => (
            kwh_per_kg_to_ev_per_atom(*energy_density, molar_mass)?,
            "eV/atom",
            "E_kWh_kg * 3.6e6 * (M / 1000) / N_A / e",
        ),
        Calculator::MaterialUsePerArea { thickness, density } => (
            material_use_per_area(*thickness, *density)?,
            "g/m^2",
            "thickness * density * 1000",
        ),
        Calculator::MaterialUsePerWatt {
            areal_mass,
            area,
            peak_power,
        } => (
            material_use_per_watt(*areal_mass, *area, *peak_power)?,
            "g/Wp",
            "areal_mass * area / peak_power",
        ),
        Calculator::BatteryEnergyDensity { e_max, molecular_mass } => (
            battery_energy_density(*e_max, *molecular_mass)?,
            "Wh/kg",
            "E_max * 4.45e-23 / (A_MM * 1.661e-27)",
        ),
        Calculator::BatteryPowerDensity { p_max, mass } => (
            battery_power_density(*p_max, *mass)?,
            "kW/kg",
            "P_max * 1.602e-7 / mass / 1000",
        ),
        Calculator::NuclearTransferRate(input) => (
            nuclear_transfer_rate(input)?,
            "1/s",
            "g * exp(-G) * sqrt(vol_ratio) * g / dE * sqrt(N_D) * sqrt(N_A) / hbar",
        ),
        Calculator::VolRatio { r_nuc, r0, delta_r } => (
            vol_ratio(*r_nuc, *r0, *delta_r)?,
            "1",
            "(4/3) pi r^3 / (2 pi^2 R0 dR^2)",
        ),
        Calculator::MagneticCoupling { b_field } => (magnetic_coupling(*b_field)?, "eV", "mu_N * B"),
    };
    let discrepancy = match calc {
        Calculator::NuclearTransferRate(input) if *input == NuclearTransferInput::worked_example() => {
            Some(nuclear_discrepancy_report())
        }
        _ => None,
    };
    Ok(Calculation {
        formula: calc.id().to_owned(),
        value,
        unit: unit.to_owned(),
        expression: expression.to_owned(),
        discrepancy,
    })
}
