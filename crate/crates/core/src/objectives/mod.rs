//! Corrupted objectives and their Rockafellian relaxations, with adjoint gradients.

mod saa1d;
mod support2d;

pub use saa1d::{
    grad_z_saa, objective_saa, rock_grad_ex1, rock_objective_ex1, rock_objective_ex2,
    t_subproblem_costs, Evaluation1D, Ex1Joint, Saa1D, WeightedSaa,
};
pub use support2d::{
    rock_grad_t_ex3, rock_grad_z_ex3, rock_objective_ex3, Evaluation2D, SupportProblem2D,
    SupportTStep, SupportZStep,
};
