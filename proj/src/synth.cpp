#include "csd/synth.hpp"

#include "csd/errors.hpp"
#include "csd/rng.hpp"

#include <algorithm>
#include <cmath>

namespace csd {

namespace {

double draw_noise(NoiseKind kind, double scale, Rng& rng) {
    switch (kind) {
        case NoiseKind::Uniform: return rng.uniform_noise(scale);
        case NoiseKind::Laplace: return rng.laplace(scale / std::sqrt(2.0));
        case NoiseKind::Gaussian: return rng.normal(0.0, scale);
    }
    return 0.0;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

NoiseKind noise_kind_from_string(const std::string& s) {
    if (s == "uniform") return NoiseKind::Uniform;
    if (s == "laplace") return NoiseKind::Laplace;
    if (s == "gaussian") return NoiseKind::Gaussian;
    throw ValidationError("unknown noise kind '" + s + "'");
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::Uniform: return "uniform";
        case NoiseKind::Laplace: return "laplace";
        case NoiseKind::Gaussian: return "gaussian";
    }
    return "uniform";
}

std::vector<Eigen::Index> SemSpec::topological_order() const {
    const Eigen::Index n = dag.rows();
    if (dag.cols() != n) throw ShapeError("SemSpec: dag must be square");
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (dag(i, j) != 0) ++indegree[static_cast<std::size_t>(j)];
        }
    }
    std::vector<Eigen::Index> order;
    std::vector<Eigen::Index> ready;
    for (Eigen::Index j = n; j-- > 0;) {
        if (indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
    }
    while (!ready.empty()) {
        const Eigen::Index v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (dag(v, j) != 0 && --indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
        }
    }
    if (static_cast<Eigen::Index>(order.size()) != n) {
        throw ValidationError("SemSpec: dag contains a cycle");
    }
    return order;
}

Eigen::MatrixXi random_dag(Eigen::Index n, double edge_prob, std::uint64_t seed) {
    if (n < 2) throw ShapeError("random_dag: need at least 2 nodes");
    if (edge_prob < 0.0 || edge_prob > 1.0) throw ValidationError("random_dag: edge_prob outside [0,1]");
    Rng rng = Rng(seed).derive("random-dag");
    const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(n));
    Eigen::MatrixXi dag = Eigen::MatrixXi::Zero(n, n);
    for (std::size_t a = 0; a < perm.size(); ++a) {
        for (std::size_t b = a + 1; b < perm.size(); ++b) {
            if (rng.bernoulli(edge_prob)) {
                dag(static_cast<Eigen::Index>(perm[a]), static_cast<Eigen::Index>(perm[b])) = 1;
            }
        }
    }
    return dag;
}

SemSpec make_random_linear_sem(Eigen::Index n, double edge_prob, NoiseKind noise,
                               std::uint64_t seed) {
    SemSpec spec;
    spec.dag = random_dag(n, edge_prob, seed);
    spec.linear = true;
    spec.noise = noise;
    spec.weights = Eigen::MatrixXd::Zero(n, n);
    Rng rng = Rng(seed).derive("linear-weights");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (spec.dag(i, j) != 0) {
                const double magnitude = rng.uniform(0.5, 2.0);
                spec.weights(i, j) = rng.bernoulli(0.5) ? magnitude : -magnitude;
            }
        }
    }
    return spec;
}

SemSpec make_random_nonlinear_sem(Eigen::Index n, double edge_prob, NoiseKind noise,
                                  std::uint64_t seed) {
    SemSpec spec;
    spec.dag = random_dag(n, edge_prob, seed);
    spec.linear = false;
    spec.noise = noise;
    spec.mechanism_seed = Rng(seed).derive("mechanisms").next_u64();
    return spec;
}

bool linear_identifiability_warning(const SemSpec& spec) {
    return spec.linear && spec.noise == NoiseKind::Gaussian;
}

Eigen::MatrixXd sample_linear_sem(const SemSpec& spec, Eigen::Index b, std::uint64_t seed) {
    if (!spec.linear) throw ValidationError("sample_linear_sem: spec is nonlinear");
    const Eigen::Index n = spec.n_vars();
    const std::vector<Eigen::Index> order = spec.topological_order();
    Rng rng = Rng(seed).derive("linear-sem");
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(b, n);
    for (const Eigen::Index j : order) {
        for (Eigen::Index r = 0; r < b; ++r) {
            double v = draw_noise(spec.noise, spec.noise_scale, rng);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (spec.dag(i, j) != 0) v += spec.weights(i, j) * x(r, i);
            }
            x(r, j) = v;
        }
    }
    return x;
}

Eigen::MatrixXd sample_nonlinear_sem(const SemSpec& spec, Eigen::Index b, std::uint64_t seed) {
    if (spec.linear) throw ValidationError("sample_nonlinear_sem: spec is linear");
    const Eigen::Index n = spec.n_vars();
    const int width = spec.nonlinear_width;
    const std::vector<Eigen::Index> order = spec.topological_order();
    const Rng mech_root(spec.mechanism_seed);
    Rng rng = Rng(seed).derive("nonlinear-sem");

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(b, n);
    for (const Eigen::Index j : order) {
        std::vector<Eigen::Index> parents;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (spec.dag(i, j) != 0) parents.push_back(i);
        }
        if (parents.empty()) {
            for (Eigen::Index r = 0; r < b; ++r) {
                x(r, j) = draw_noise(spec.noise, spec.noise_scale, rng);
            }
            continue;
        }

        // Node mechanism: a layer of `width` Gaussian-bump units with standard
        // normal weights, regenerated from the mechanism seed. Bump units give
        // generically non-invertible mechanisms, which keeps the direction of
        // each edge identifiable from the joint distribution.
        Rng mech = mech_root.derive("node", static_cast<std::uint64_t>(j));
        Eigen::MatrixXd hidden(static_cast<Eigen::Index>(parents.size()), width);
        Eigen::VectorXd hidden_bias(width);
        Eigen::VectorXd out(width);
        for (Eigen::Index d = 0; d < width; ++d) {
            for (Eigen::Index p = 0; p < hidden.rows(); ++p) hidden(p, d) = mech.normal();
            hidden_bias(d) = 0.25 * mech.normal();
            out(d) = mech.normal();
        }

        for (Eigen::Index r = 0; r < b; ++r) {
            Eigen::VectorXd pv(static_cast<Eigen::Index>(parents.size()));
            for (std::size_t p = 0; p < parents.size(); ++p) {
                pv(static_cast<Eigen::Index>(p)) = x(r, parents[p]);
            }
            const Eigen::VectorXd z = (hidden.transpose() * pv) + hidden_bias;
            const Eigen::VectorXd act = (-z.array().square()).exp().matrix();
            x(r, j) = out.dot(act) + draw_noise(spec.noise, spec.noise_scale, rng);
        }
    }
    return x;
}

Eigen::VectorXd attach_binary_outcome(const Eigen::MatrixXd& x,
                                      const std::vector<Eigen::Index>& parents,
                                      const std::vector<double>& weights, std::uint64_t seed) {
    if (parents.size() != weights.size()) {
        throw ShapeError("attach_binary_outcome: parent/weight count mismatch");
    }
    for (const Eigen::Index p : parents) {
        if (p < 0 || p >= x.cols()) throw ShapeError("attach_binary_outcome: parent index out of range");
    }
    const Eigen::Index b = x.rows();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(b);
    for (std::size_t k = 0; k < parents.size(); ++k) {
        z += weights[k] * x.col(parents[k]);
    }

    // Bisect the intercept so the expected positive rate is 0.5.
    const auto rate = [&](double intercept) {
        double s = 0.0;
        for (Eigen::Index r = 0; r < b; ++r) s += sigmoid(z(r) + intercept);
        return s / static_cast<double>(b);
    };
    double lo = -30.0, hi = 30.0;
    if (rate(lo) > 0.65 || rate(hi) < 0.35) {
        throw DegenerateDataError("attach_binary_outcome: cannot balance outcome within intercept range");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rate(mid) < 0.5) lo = mid;
        else hi = mid;
    }
    const double intercept = 0.5 * (lo + hi);

    Rng rng = Rng(seed).derive("outcome");
    Eigen::VectorXd y(b);
    for (Eigen::Index r = 0; r < b; ++r) {
        y(r) = rng.bernoulli(sigmoid(z(r) + intercept)) ? 1.0 : 0.0;
    }
    return y;
}

RecoveryMetrics structural_metrics(const Eigen::MatrixXi& est, const Eigen::MatrixXi& truth) {
    if (est.rows() != truth.rows() || est.cols() != truth.cols() || est.rows() != est.cols()) {
        throw ShapeError("structural_metrics: adjacency shape mismatch");
    }
    const Eigen::Index n = est.rows();
    int missing = 0, extra = 0, reversed = 0, matched = 0;
    int est_edges = 0, truth_edges = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            if (est(i, j) != 0) ++est_edges;
            if (truth(i, j) != 0) ++truth_edges;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const bool t_ij = truth(i, j) != 0, t_ji = truth(j, i) != 0;
            const bool e_ij = est(i, j) != 0, e_ji = est(j, i) != 0;
            if (t_ij && e_ij) ++matched;
            if (t_ji && e_ji) ++matched;
            const bool t_any = t_ij || t_ji;
            const bool e_any = e_ij || e_ji;
            if (t_any && e_any && ((t_ij && e_ji) || (t_ji && e_ij)) && !(t_ij && e_ij) &&
                !(t_ji && e_ji)) {
                ++reversed;
            } else if (t_any && !e_any) {
                ++missing;
            } else if (!t_any && e_any) {
                extra += (e_ij ? 1 : 0) + (e_ji ? 1 : 0);
            } else if (t_any && e_any) {
                // same pair, same orientation handled via `matched`; a pair with
                // both directions estimated against one true direction counts as
                // one extra edge
                if (e_ij && e_ji) ++extra;
            }
        }
    }
    RecoveryMetrics m;
    m.shd = missing + extra + reversed;
    if (est_edges == 0 && truth_edges == 0) {
        m.edge_precision = m.edge_recall = m.edge_f1 = 1.0;
        return m;
    }
    m.edge_precision = est_edges == 0 ? 0.0 : static_cast<double>(matched) / est_edges;
    m.edge_recall = truth_edges == 0 ? 0.0 : static_cast<double>(matched) / truth_edges;
    m.edge_f1 = (m.edge_precision + m.edge_recall) == 0.0
                    ? 0.0
                    : 2.0 * m.edge_precision * m.edge_recall / (m.edge_precision + m.edge_recall);
    return m;
}

} // namespace csd
