/// Every numerical threshold used by the crate, in one place.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ToleranceProfile {
    /// Absolute and relative local error of the geodesic integrator.
    pub ode_tol: f64,
    pub ode_max_steps: usize,
    /// Christoffel symbols from central differences of the metric.
    pub fd_christoffel_step: f64,
    /// Derivatives of Christoffel symbols (curvature).
    pub fd_curvature_step: f64,
    pub fd_gradient_step: f64,
    pub fd_hessian_step: f64,
    /// Endpoint residual (chart norm) accepted by the log-map shooting.
    pub log_residual: f64,
    pub log_max_iter: usize,
    /// Two converged shots further apart than this are a cut-locus ambiguity.
    pub log_ambiguity: f64,
    /// A chord-start solution shorter than this fraction of the injectivity
    /// radius is provably the minimizing one; the extra starts are skipped.
    pub log_screen_fraction: f64,
    pub log_extra_starts: usize,
    /// Relative margin added to sampled sectional curvature maxima.
    pub curvature_margin: f64,
    pub membership: f64,
    pub segment_membership: f64,
    pub duplicate_distance: f64,
    pub duplicate_value: f64,
    pub cone_convex: f64,
    pub cone_sigma_max_log2: u32,
    pub cone_samples: usize,
    pub cone_min_samples: usize,
    pub sublevel_starts: usize,
    pub boundary_seeds: usize,
    pub second_diff_step: f64,
    pub second_diff_tol: f64,
    pub jet_tol: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            ode_max_steps: 200_000,
            fd_christoffel_step: 1e-5,
            fd_curvature_step: 1e-4,
            fd_gradient_step: 1e-6,
            fd_hessian_step: 1e-4,
            log_residual: 1e-10,
            log_max_iter: 60,
            log_ambiguity: 1e-4,
            log_screen_fraction: 0.9,
            log_extra_starts: 8,
            curvature_margin: 0.1,
            membership: 1e-9,
            segment_membership: 1e-7,
            duplicate_distance: 1e-3,
            duplicate_value: 1e-8,
            cone_convex: 1e-9,
            cone_sigma_max_log2: 10,
            cone_samples: 2000,
            cone_min_samples: 100,
            sublevel_starts: 20,
            boundary_seeds: 64,
            second_diff_step: 1e-2,
            second_diff_tol: 1e-6,
            jet_tol: 1e-9,
        }
    }
}
