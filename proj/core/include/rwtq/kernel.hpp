#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "rwtq/grid.hpp"

namespace rwtq {

struct KernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Kernel over real-vector state-action encodings. `scaled` wraps a base
// kernel with a multiplier c; with c <= 1 every Gram eigenvalue of the
// scaled kernel is dominated by the corresponding base eigenvalue, which is
// how the lower-complexity correction space is realized.
struct KernelSpec {
    enum class Kind { rbf, tabular_delta, scaled };

    Kind kind = Kind::rbf;
    double lengthscale = 1.0;  // rbf only
    double scale = 1.0;
    std::shared_ptr<const KernelSpec> base;  // scaled only
    double multiplier = 1.0;                 // scaled only

    static KernelSpec rbf(double lengthscale, double scale = 1.0);
    static KernelSpec tabular_delta(double scale = 1.0);
    static KernelSpec scaled_of(const KernelSpec& base, double multiplier);
};

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y);

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const std::vector<Eigen::VectorXd>& points);

// Cholesky factor of (K + lambda I) over a fixed design, with jitter
// escalation on failure. Shared by prediction and posterior variance.
class UncertaintyState {
  public:
    UncertaintyState(KernelSpec spec, std::vector<Eigen::VectorXd> points,
                     double ridge);

    const KernelSpec& spec() const { return spec_; }
    const std::vector<Eigen::VectorXd>& points() const { return points_; }
    double ridge() const { return ridge_; }
    int size() const { return static_cast<int>(points_.size()); }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    Eigen::VectorXd cross_kernel(const Eigen::VectorXd& x) const;

  private:
    KernelSpec spec_;
    std::vector<Eigen::VectorXd> points_;
    double ridge_;
    Eigen::LLT<Eigen::MatrixXd> factor_;
};

// Posterior variance (k(x,x) - k_n(x)^T (K+lambda I)^{-1} k_n(x)) / lambda.
// Tiny negative round-off is clamped to 0; anything below -1e-10 is an
// error.
double posterior_variance(const UncertaintyState& state,
                          const Eigen::VectorXd& x);

// Dual-form kernel ridge regression: prediction sum_i alpha_i k(x_i, x)
// with (K + lambda I) alpha = y. Empty data yields the zero function.
class KrrModel {
  public:
    KrrModel(KernelSpec spec, double ridge);  // empty model
    KrrModel(KernelSpec spec, std::vector<Eigen::VectorXd> points,
             const Eigen::VectorXd& targets, double ridge);

    double predict(const Eigen::VectorXd& x) const;
    // Re-solve the dual weights for new targets over the same design.
    void refit_targets(const Eigen::VectorXd& targets);

    const Eigen::VectorXd& dual_weights() const { return alpha_; }
    const UncertaintyState& uncertainty() const { return *state_; }
    bool empty() const { return !state_ || state_->size() == 0; }

  private:
    std::shared_ptr<UncertaintyState> state_;
    Eigen::VectorXd alpha_;
};

KrrModel krr_fit(const std::vector<Eigen::VectorXd>& points,
                 const Eigen::VectorXd& targets, const KernelSpec& spec,
                 double ridge);

// Growing-design KRR used inside the episodic loop: appending a point
// extends the Cholesky factor in O(n^2) instead of refitting from scratch,
// and predictions/variances over a fixed query set are maintained in O(nQ).
// Produces the same values as krr_fit over the accumulated design.
class IncrementalKrr {
  public:
    IncrementalKrr(KernelSpec spec, double ridge,
                   std::vector<Eigen::VectorXd> query_points);

    void append(const Eigen::VectorXd& x);
    int size() const { return static_cast<int>(points_.size()); }

    // Dual weights for the given targets (length == size()).
    Eigen::VectorXd solve_targets(const Eigen::VectorXd& targets) const;
    // Predictions at every query point for the given dual weights.
    Eigen::VectorXd predict_queries(const Eigen::VectorXd& alpha) const;
    // Posterior variance at every query point.
    Eigen::VectorXd variance_queries() const;

    const std::vector<Eigen::VectorXd>& points() const { return points_; }

  private:
    KernelSpec spec_;
    double ridge_;
    std::vector<Eigen::VectorXd> points_;
    std::vector<Eigen::VectorXd> queries_;
    Eigen::MatrixXd chol_;        // lower factor of (K + ridge I), n x n
    Eigen::MatrixXd whitened_q_;  // L^{-1} K_q, n x Q
    Eigen::MatrixXd kq_;          // K_q, n x Q
    Eigen::VectorXd query_diag_;  // k(q,q) per query
    Eigen::VectorXd query_sumsq_; // column sums of squares of whitened_q_
};

// log det(I + G / lambda) for a symmetric PSD Gram matrix.
double information_gain(const Eigen::MatrixXd& gram, double lambda);

// sum_i mu_i / (mu_i + lambda) over non-negative eigenvalues.
double effective_dimension(const std::vector<double>& eigenvalues,
                           double lambda);

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

// ||sum phi_s eps_s||_{Lambda_t^{-1}} <= ||eps||_2 with
// Lambda_t = Lambda_0 + sum phi_s phi_s^T. Deterministic inequality.
BoundCheck self_normalized_check(const std::vector<Eigen::VectorXd>& phis,
                                 const std::vector<double>& eps,
                                 const Eigen::MatrixXd& lambda0);

// sum_n sqrt(phi_n^T Lambda_n^{-1} phi_n) with Lambda_n = lambda I +
// sum_{i<n} phi_i phi_i^T, against sqrt(2 N log det(lambda I + Lambda_N') /
// det(lambda I)) where Lambda_N' accumulates all N points. Requires
// ||phi|| <= 1 and lambda >= 1 for the inequality to be deterministic.
BoundCheck elliptical_potential_check(const std::vector<Eigen::VectorXd>& phis,
                                      double lambda);

struct ComplexityDiagnostics {
    double effective_dimension = 0.0;
    double information_gain = 0.0;
    double coverage_constant = 0.0;
    double alpha0 = 1.0, alpha1 = 1.0, beta0 = 0.5, beta1 = 0.5;
};

// State-action encodings used by the kernel learners.
using Encoder = std::function<Eigen::VectorXd(int s, int a)>;

// Normalized grid coordinates (each in [0,1]) concatenated with a one-hot
// action block; keeps k(x,x) constant and the RBF well-scaled.
Encoder grid_encoder(const GridWorldSpec& spec);

// Raw (s, a) index pair; intended for the tabular_delta kernel.
Encoder index_encoder();

}  // namespace rwtq
