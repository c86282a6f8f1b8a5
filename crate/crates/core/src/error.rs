use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree {0} exceeds the dimension 6")]
    DegreeOverflow(usize),
    #[error("expected a form of degree {expected}, got degree {found}")]
    WrongDegree { expected: usize, found: usize },
    #[error("cannot contract scalar")]
    ContractScalar,
    #[error("invalid index tuple {0:?}: indices must be strictly increasing in 1..=6")]
    BadIndex(Vec<usize>),
    #[error("index tuple {0:?} has length different from the form degree {1}")]
    IndexArity(Vec<usize>, usize),
    #[error("evaluation expects {expected} vectors, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("q_ω defined for effective forms only")]
    NotEffective,
    #[error("degenerate form, no Hitchin decomposition")]
    Degenerate,
    #[error("degenerate structure")]
    DegenerateStructure,
    #[error("no exact square root of {0}; use float mode")]
    Irrational(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("point {point:?} is closer than {margin} to the domain boundary")]
    NearBoundary { point: Vec<f64>, margin: f64 },
    #[error("unknown equation `{0}`")]
    UnknownEquation(String),
    #[error("parameter γ must be nonzero for `{0}`")]
    ZeroGamma(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("ODE failure at x = {x}: {reason}")]
    Ode { x: f64, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
