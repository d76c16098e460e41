//! Random k-subsets, their overlap distribution and the directions `v_I`.

pub mod directions;
pub mod sampling;
pub mod tail;

pub use directions::{
    c_nk, direction_separation, in_separation_regime, predicted_inner_product, subset_direction,
    DirectionMap,
};
pub use sampling::{
    find_separated_family, intersection_size, max_pairwise_intersection, sample_ksubset, KSubset,
    SubsetSampler,
};
pub use tail::{
    exact_point_mass, exact_tail, ln_choose, ln_exact_tail, ln_point_mass, tail_bound_check,
    TailReport,
};
