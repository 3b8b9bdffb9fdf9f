use alloc::string::String;

/// Errors raised anywhere in the identification pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("model `{0}` is already registered")]
    DuplicateModel(String),
    #[error("no model named `{0}`")]
    UnknownModel(String),
    #[error("block dependencies form a cycle")]
    CyclicDependencies,
    #[error("block `{block}` depends on invalid sigma component ({dep_block}, {component})")]
    InvalidDependency {
        block: String,
        dep_block: usize,
        component: usize,
    },
    #[error("block basis sizes sum to {blocks} but the parameter map has q = {pmap}")]
    QMismatch { blocks: usize, pmap: usize },
    #[error("parameter coverage: {0}")]
    ParameterCoverage(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state left the admissible set at t = {t}")]
    OmegaExit { t: f64 },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("time {t} is outside the trajectory span [{t0}, {t1}]")]
    OutsideSpan { t: f64, t0: f64, t1: f64 },

    #[error("model has no analytic output jet")]
    MissingAnalyticJet,
    #[error("model has no inverse output map")]
    MissingInverseMap,
    #[error("sample spacing is not uniform at index {index}")]
    NonUniformSpacing { index: usize },
    #[error("{samples} samples are too few for a {stencil}-point stencil")]
    TooFewSamples { samples: usize, stencil: usize },
    #[error("stencil width {stencil} is invalid for derivative order {order}")]
    InvalidStencil { stencil: usize, order: usize },

    #[error("evaluator `{label}` is not finite at t = {t}")]
    NonFinite { label: String, t: f64 },
    #[error("block `{block}`: basis is linearly dependent on the grid")]
    LinearlyDependent { block: String },
    #[error("singular matrix (smallest singular value {min_singular:e})")]
    Singular { min_singular: f64 },
    #[error("sigma components {i} and {j} disagree: {a} vs {b}")]
    Inconsistent { i: usize, j: usize, a: f64, b: f64 },
    #[error("recovered parameters lie outside the admissible set: {0}")]
    ImageViolation(String),
    #[error("ratio `{label}`: no time passes the denominator guard")]
    NoValidTime { label: String },
    #[error("output channel {channel} is constant on the data window")]
    ConstantObservation { channel: usize },
    #[error("block `{block}`: {source}")]
    Block {
        block: String,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("coefficient matrix is rank deficient (rank {rank} < {cols}); parameters are not identifiable")]
    NonIdentifiable { rank: usize, cols: usize },
    #[error("polynomial degree s = {s} violates s >= b - 1 with b = {b}")]
    AssumptionViolated { s: usize, b: usize },
}

impl Error {
    pub(crate) fn in_block(self, label: &str) -> Self {
        match self {
            e @ Error::Block { .. } => e,
            e => Error::Block {
                block: label.into(),
                source: alloc::boxed::Box::new(e),
            },
        }
    }

    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DuplicateModel(_) => "duplicate_model",
            Error::UnknownModel(_) => "unknown_model",
            Error::CyclicDependencies => "cyclic_dependencies",
            Error::InvalidDependency { .. } => "invalid_dependency",
            Error::QMismatch { .. } => "q_mismatch",
            Error::ParameterCoverage(_) => "parameter_coverage",
            Error::Dimension(_) => "dimension",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::OmegaExit { .. } => "omega_exit",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::OutsideSpan { .. } => "outside_span",
            Error::MissingAnalyticJet => "missing_analytic_jet",
            Error::MissingInverseMap => "missing_inverse_map",
            Error::NonUniformSpacing { .. } => "non_uniform_spacing",
            Error::TooFewSamples { .. } => "too_few_samples",
            Error::InvalidStencil { .. } => "invalid_stencil",
            Error::NonFinite { .. } => "non_finite",
            Error::LinearlyDependent { .. } => "linearly_dependent",
            Error::Singular { .. } => "singular",
            Error::Inconsistent { .. } => "inconsistent",
            Error::ImageViolation(_) => "image_violation",
            Error::NoValidTime { .. } => "no_valid_time",
            Error::ConstantObservation { .. } => "constant_observation",
            Error::Block { source, .. } => source.kind(),
            Error::NonIdentifiable { .. } => "non_identifiable",
            Error::AssumptionViolated { .. } => "assumption_violated",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
