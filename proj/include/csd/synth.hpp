#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace csd {

enum class NoiseKind { Uniform, Laplace, Gaussian };

NoiseKind noise_kind_from_string(const std::string& s);
std::string to_string(NoiseKind kind);

// Ground-truth structural equation model. Nonlinear mechanisms are
// regenerated deterministically from mechanism_seed, so the spec serializes to
// a handful of scalars.
struct SemSpec {
    Eigen::MatrixXi dag;          // [i][j] = 1 for edge i -> j; acyclic
    bool linear = true;
    Eigen::MatrixXd weights;      // per-edge linear weight, |w| in [0.5, 2.0]
    std::uint64_t mechanism_seed = 0;
    int nonlinear_width = 10;
    NoiseKind noise = NoiseKind::Uniform;
    double noise_scale = 1.0;
    std::vector<Eigen::Index> outcome_parents;
    std::vector<double> outcome_weights;

    Eigen::Index n_vars() const { return dag.rows(); }
    std::vector<Eigen::Index> topological_order() const; // throws if cyclic
};

/// Forward edges of a random permutation, each kept with probability
/// edge_prob; acyclic by construction.
Eigen::MatrixXi random_dag(Eigen::Index n, double edge_prob, std::uint64_t seed);

/// Random linear SEM on a random DAG: weight magnitudes U[0.5, 2.0] with
/// random signs.
SemSpec make_random_linear_sem(Eigen::Index n, double edge_prob, NoiseKind noise,
                               std::uint64_t seed);

SemSpec make_random_nonlinear_sem(Eigen::Index n, double edge_prob, NoiseKind noise,
                                  std::uint64_t seed);

/// True when the spec's noise choice undermines linear non-Gaussian
/// identifiability (Gaussian noise on a linear SEM).
bool linear_identifiability_warning(const SemSpec& spec);

/// Ancestral sampling x_j = sum_parents w * x_parent + noise_j.
Eigen::MatrixXd sample_linear_sem(const SemSpec& spec, Eigen::Index b, std::uint64_t seed);

/// Ancestral sampling with per-node random one-hidden-layer mechanisms
/// (width nonlinear_width, standard normal weights, tanh activation).
Eigen::MatrixXd sample_nonlinear_sem(const SemSpec& spec, Eigen::Index b, std::uint64_t seed);

/// y ~ Bernoulli(sigmoid(sum w*x_parent + b)) with b searched so the expected
/// positive rate lands in [0.35, 0.65].
Eigen::VectorXd attach_binary_outcome(const Eigen::MatrixXd& x,
                                      const std::vector<Eigen::Index>& parents,
                                      const std::vector<double>& weights, std::uint64_t seed);

struct RecoveryMetrics {
    int shd = 0; // missing + extra + reversed (reversal counts once)
    double edge_precision = 0.0;
    double edge_recall = 0.0;
    double edge_f1 = 0.0;
};

RecoveryMetrics structural_metrics(const Eigen::MatrixXi& est, const Eigen::MatrixXi& truth);

} // namespace csd
