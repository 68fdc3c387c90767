//! A configured pipeline holding the generated exceptional classes.

use crate::beilinson::{resolution, Resolution};
use crate::cache::load_or_generate;
use crate::chern::{Chern, Slope};
use crate::cone::{effective_cone, ConeComputation};
use crate::config::Config;
use crate::error::Result;
use crate::exceptional::{ExceptionalBundle, ExceptionalDb, ExceptionalPair, Window};
use crate::extremal::{analyze, scan_window, ExtremalAnalysis};
use crate::stability::{delta_surface, DeltaValue, DELTA_REACH};

/// Configuration plus the exceptional classes it generates.
#[derive(Clone, Debug)]
pub struct Engine {
    pub config: Config,
    classes: Vec<ExceptionalBundle>,
}

impl Engine {
    /// Generates (or loads from the cache) the classes for `config`.
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let dir = config.effective_cache_dir();
        let classes = load_or_generate(dir.as_deref(), config.rank_bound, config.cap)?;
        Ok(Engine { config, classes })
    }

    /// Number of twist classes in the database.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// The database windowed around the curve scanned for `xi`.
    pub fn database_for(&self, xi: &Chern) -> Result<ExceptionalDb> {
        let window = scan_window(xi, &self.config.scan())?;
        ExceptionalDb::from_classes(self.config.rank_bound, window, self.classes.clone())
    }

    /// The delta surface at a slope.
    pub fn delta(&self, mu: &Slope) -> Result<DeltaValue> {
        let db = ExceptionalDb::from_classes(
            self.config.rank_bound,
            Window::square(0),
            self.classes.clone(),
        )?;
        delta_surface(mu, &db.covering(mu, DELTA_REACH))
    }

    /// Controlling bundles and extremal pairs of `xi`.
    pub fn analyze(&self, xi: &Chern) -> Result<ExtremalAnalysis> {
        let db = self.database_for(xi)?;
        analyze(xi, &db, &self.config.scan(), self.config.sign_reading)
    }

    /// The full cone computation for `xi`.
    pub fn cone(&self, xi: &Chern) -> Result<ConeComputation> {
        let db = self.database_for(xi)?;
        effective_cone(xi, &db, &self.config.scan(), self.config.sign_reading)
    }

    /// The cone of the Hilbert scheme of `n` points.
    pub fn hilbert(&self, n: i64) -> Result<ConeComputation> {
        self.cone(&Chern::hilbert_scheme(n))
    }

    /// The resolution attached to a pair.
    ///
    /// For an extremal pair this is the resolution assigned by the extremal-pair
    /// search; for any other pair it is the first admissible one.
    pub fn resolve(&self, xi: &Chern, pair: &ExceptionalPair) -> Result<Resolution> {
        let analysis = self.analyze(xi)?;
        if let Some(p) = analysis.pairs.iter().find(|p| p.pair == *pair) {
            return Ok(p.resolution.clone());
        }
        let db = self.database_for(xi)?;
        resolution(xi, pair, &db, self.config.sign_reading)
    }
}
