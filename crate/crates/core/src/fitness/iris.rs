use crate::config::Hyperparameters;
use crate::engine::Individual;
use crate::environments::LabeledExample;
use crate::fitness::FitnessEngine;
use crate::program::Program;
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// Classification accuracy of `program` on `data`: the predicted class is
/// the argmax of the action registers.
///
/// Returns `h.default_fitness` for empty data or when the program's widths do
/// not fit a four-feature, three-class problem.
pub fn eval_iris<T: Scalar>(program: &mut Program<T>, data: &[LabeledExample<T>], h: &Hyperparameters) -> f64 {
    if data.is_empty()
        || program.dims.n_inputs != 4
        || program.dims.n_actions != 3
        || program.dims.n_actions > program.registers.len()
    {
        return h.default_fitness;
    }
    let factor = T::of(h.external_factor);
    let correct = data
        .iter()
        .filter(|example| program.execute(&example.features, factor).best_action(3) == example.label)
        .count();
    correct as f64 / data.len() as f64
}

/// Deterministic classification fitness; scores are cached across
/// generations.
#[derive(Debug, Clone)]
pub struct IrisFitness<T> {
    data: Vec<LabeledExample<T>>,
    hyperparameters: Hyperparameters,
}

impl<T: Scalar> IrisFitness<T> {
    pub fn new(data: Vec<LabeledExample<T>>, h: &Hyperparameters) -> Self {
        Self {
            data,
            hyperparameters: h.clone(),
        }
    }

    pub fn data(&self) -> &[LabeledExample<T>] {
        &self.data
    }
}

impl<T: Scalar> FitnessEngine<T> for IrisFitness<T> {
    fn evaluate(&self, individual: &mut Individual<T>, _rng: &mut RngStream) -> f64 {
        eval_iris(&mut individual.program, &self.data, &self.hyperparameters)
    }

    fn is_stochastic(&self) -> bool {
        false
    }
}
