//! Corpus density against census data, and per-country language profiles.

mod census;
mod density;
mod pearson;
mod profile;

pub use census::{
    digital_population, gdp_normalizer, load_census, parse_census, weighted_digital_estimate, CountryStats, Weighting,
};
pub use density::{density_correlations, read_density, DensityReport, DensityRow};
pub use pearson::{pearson, pearson_by_country, Correlation};
pub use profile::{language_profiles, profile_correlation, LanguageProfile};
