//! Second-by-second emission estimation and space-mean aggregation.

pub mod aggregate;
pub mod opmode;
pub mod rates;

pub use aggregate::{
    link_mean_emission, link_mean_rate, section_mean_rate, EmissionSample, LinkEmissionWindow,
    LinkRates, Mass, SectionMean,
};
pub use opmode::{classify_opmode, vsp, OpMode};
pub use rates::{EmissionRateTable, Pollutant, RateTableError, YearBin};
