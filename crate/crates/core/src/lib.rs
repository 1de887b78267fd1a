//! Planning-model repair for a symbolic planner working from incomplete
//! knowledge. Everything numeric is generic over [`numeric::Scalar`]; the
//! aliases below fix it to exact rationals.

pub mod engine;
pub mod llm;
pub mod numeric;
pub mod oracle;
pub mod pddl;
pub mod planner;
pub mod sexpr;

pub type Rational = num_rational::Ratio<i64>;

pub type Domain = pddl::Domain<Rational>;
pub type Problem = pddl::Problem<Rational>;
pub type Conjunct = pddl::Conjunct<Rational>;
pub type Condition = pddl::Condition<Rational>;
pub type ActionSchema = pddl::ActionSchema<Rational>;
pub type State = planner::State<Rational>;
pub type GroundTask = planner::GroundTask<Rational>;
pub type GroundAction = planner::GroundAction<Rational>;
pub type Scenario = oracle::Scenario<Rational>;
pub type OracleWorld = oracle::OracleWorld<Rational>;
pub type AgentKnowledge = engine::AgentKnowledge<Rational>;
pub type EpisodeResult = engine::EpisodeResult<Rational>;
