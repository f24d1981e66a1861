#include "rwtq/kernel.hpp"

#include <cmath>

namespace rwtq {

KernelSpec KernelSpec::rbf(double lengthscale, double scale) {
    if (lengthscale <= 0.0 || scale <= 0.0)
        throw KernelError("rbf kernel: lengthscale and scale must be > 0");
    KernelSpec s;
    s.kind = Kind::rbf;
    s.lengthscale = lengthscale;
    s.scale = scale;
    return s;
}

KernelSpec KernelSpec::tabular_delta(double scale) {
    if (scale <= 0.0) throw KernelError("delta kernel: scale must be > 0");
    KernelSpec s;
    s.kind = Kind::tabular_delta;
    s.scale = scale;
    return s;
}

KernelSpec KernelSpec::scaled_of(const KernelSpec& base, double multiplier) {
    if (multiplier <= 0.0)
        throw KernelError("scaled kernel: multiplier must be > 0");
    KernelSpec s;
    s.kind = Kind::scaled;
    s.base = std::make_shared<KernelSpec>(base);
    s.multiplier = multiplier;
    return s;
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y) {
    switch (spec.kind) {
        case KernelSpec::Kind::rbf: {
            double d2 = (x - y).squaredNorm();
            return spec.scale *
                   std::exp(-0.5 * d2 / (spec.lengthscale * spec.lengthscale));
        }
        case KernelSpec::Kind::tabular_delta:
            return x == y ? spec.scale : 0.0;
        case KernelSpec::Kind::scaled:
            return spec.multiplier * kernel_eval(*spec.base, x, y);
    }
    return 0.0;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec,
                            const std::vector<Eigen::VectorXd>& points) {
    const int n = static_cast<int>(points.size());
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double k = kernel_eval(spec, points[i], points[j]);
            g(i, j) = k;
            g(j, i) = k;
        }
    }
    return g;
}

namespace {

// Cholesky of (K + ridge I) with jitter escalation 1e-10 x10 up to 1e-6.
Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& k, double ridge) {
    const int n = static_cast<int>(k.rows());
    Eigen::MatrixXd m =
        k + ridge * Eigen::MatrixXd::Identity(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    double jitter = 1e-10;
    while (llt.info() != Eigen::Success && jitter <= 1e-6) {
        llt.compute(m + jitter * Eigen::MatrixXd::Identity(n, n));
        jitter *= 10.0;
    }
    if (llt.info() != Eigen::Success)
        throw KernelError(
            "kernel factorization failed after jitter escalation (n=" +
            std::to_string(n) + ", ridge=" + std::to_string(ridge) + ")");
    return llt;
}

}  // namespace

UncertaintyState::UncertaintyState(KernelSpec spec,
                                   std::vector<Eigen::VectorXd> points,
                                   double ridge)
    : spec_(std::move(spec)), points_(std::move(points)), ridge_(ridge) {
    if (ridge_ <= 0.0) throw KernelError("ridge must be > 0");
    if (!points_.empty()) factor_ = factorize(gram_matrix(spec_, points_), ridge_);
}

Eigen::VectorXd UncertaintyState::solve(const Eigen::VectorXd& rhs) const {
    if (points_.empty()) return Eigen::VectorXd();
    return factor_.solve(rhs);
}

Eigen::VectorXd UncertaintyState::cross_kernel(const Eigen::VectorXd& x) const {
    Eigen::VectorXd k(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i)
        k[i] = kernel_eval(spec_, points_[i], x);
    return k;
}

double posterior_variance(const UncertaintyState& state,
                          const Eigen::VectorXd& x) {
    double kxx = kernel_eval(state.spec(), x, x);
    if (state.size() == 0) return kxx / state.ridge();
    Eigen::VectorXd kn = state.cross_kernel(x);
    double v = (kxx - kn.dot(state.solve(kn))) / state.ridge();
    if (v < -1e-10)
        throw KernelError("posterior variance negative beyond tolerance");
    return v < 0.0 ? 0.0 : v;
}

KrrModel::KrrModel(KernelSpec spec, double ridge)
    : state_(std::make_shared<UncertaintyState>(std::move(spec),
                                                std::vector<Eigen::VectorXd>{},
                                                ridge)) {}

KrrModel::KrrModel(KernelSpec spec, std::vector<Eigen::VectorXd> points,
                   const Eigen::VectorXd& targets, double ridge)
    : state_(std::make_shared<UncertaintyState>(std::move(spec),
                                                std::move(points), ridge)) {
    refit_targets(targets);
}

void KrrModel::refit_targets(const Eigen::VectorXd& targets) {
    if (targets.size() != state_->size())
        throw KernelError("krr: target count does not match design");
    alpha_ = state_->solve(targets);
}

double KrrModel::predict(const Eigen::VectorXd& x) const {
    if (empty()) return 0.0;
    return alpha_.dot(state_->cross_kernel(x));
}

KrrModel krr_fit(const std::vector<Eigen::VectorXd>& points,
                 const Eigen::VectorXd& targets, const KernelSpec& spec,
                 double ridge) {
    return KrrModel(spec, points, targets, ridge);
}

IncrementalKrr::IncrementalKrr(KernelSpec spec, double ridge,
                               std::vector<Eigen::VectorXd> query_points)
    : spec_(std::move(spec)), ridge_(ridge), queries_(std::move(query_points)) {
    if (ridge_ <= 0.0) throw KernelError("ridge must be > 0");
    const int q = static_cast<int>(queries_.size());
    chol_.resize(0, 0);
    whitened_q_.resize(0, q);
    kq_.resize(0, q);
    query_diag_.resize(q);
    for (int j = 0; j < q; ++j)
        query_diag_[j] = kernel_eval(spec_, queries_[j], queries_[j]);
    query_sumsq_ = Eigen::VectorXd::Zero(q);
}

void IncrementalKrr::append(const Eigen::VectorXd& x) {
    const int n = size();
    const int q = static_cast<int>(queries_.size());

    Eigen::VectorXd k_row(n);
    for (int i = 0; i < n; ++i) k_row[i] = kernel_eval(spec_, points_[i], x);
    double k_self = kernel_eval(spec_, x, x) + ridge_;

    // Extend the lower Cholesky factor by one row.
    Eigen::VectorXd l_row =
        n > 0 ? chol_.topLeftCorner(n, n)
                    .triangularView<Eigen::Lower>()
                    .solve(k_row)
                    .eval()
              : Eigen::VectorXd();
    double diag2 = k_self - l_row.squaredNorm();
    if (diag2 <= 0.0)
        throw KernelError("incremental kernel factor lost positive definiteness");
    double diag = std::sqrt(diag2);

    chol_.conservativeResize(n + 1, n + 1);
    if (n > 0) {
        chol_.row(n).head(n) = l_row.transpose();
        chol_.col(n).head(n).setZero();
    }
    chol_(n, n) = diag;

    kq_.conservativeResize(n + 1, q);
    whitened_q_.conservativeResize(n + 1, q);
    for (int j = 0; j < q; ++j)
        kq_(n, j) = kernel_eval(spec_, queries_[j], x);
    if (n > 0)
        whitened_q_.row(n) =
            (kq_.row(n) - l_row.transpose() * whitened_q_.topRows(n)) / diag;
    else
        whitened_q_.row(n) = kq_.row(n) / diag;
    query_sumsq_ += whitened_q_.row(n).transpose().cwiseAbs2();

    points_.push_back(x);
}

Eigen::VectorXd IncrementalKrr::solve_targets(
    const Eigen::VectorXd& targets) const {
    const int n = size();
    if (targets.size() != n) throw KernelError("incremental krr: target count mismatch");
    if (n == 0) return Eigen::VectorXd();
    Eigen::VectorXd tmp =
        chol_.triangularView<Eigen::Lower>().solve(targets);
    return chol_.transpose().triangularView<Eigen::Upper>().solve(tmp);
}

Eigen::VectorXd IncrementalKrr::predict_queries(
    const Eigen::VectorXd& alpha) const {
    if (size() == 0) return Eigen::VectorXd::Zero(queries_.size());
    return kq_.transpose() * alpha;
}

Eigen::VectorXd IncrementalKrr::variance_queries() const {
    Eigen::VectorXd v = (query_diag_ - query_sumsq_) / ridge_;
    for (int j = 0; j < v.size(); ++j) {
        if (v[j] < -1e-10)
            throw KernelError("posterior variance negative beyond tolerance");
        if (v[j] < 0.0) v[j] = 0.0;
    }
    return v;
}

double information_gain(const Eigen::MatrixXd& gram, double lambda) {
    if (lambda <= 0.0) throw KernelError("information_gain: lambda must be > 0");
    const int n = static_cast<int>(gram.rows());
    if (n == 0) return 0.0;
    if (gram.cols() != n || (gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw KernelError("information_gain: matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram,
                                                      Eigen::EigenvaluesOnly);
    double max_eig = std::max(1.0, es.eigenvalues().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-8 * max_eig)
        throw KernelError("information_gain: matrix not PSD");
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + gram / lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw KernelError("information_gain: factorization failed");
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
    return 2.0 * logdet;
}

double effective_dimension(const std::vector<double>& eigenvalues,
                           double lambda) {
    if (lambda <= 0.0)
        throw KernelError("effective_dimension: lambda must be > 0");
    double acc = 0.0;
    for (double mu : eigenvalues) {
        if (mu < -1e-10)
            throw KernelError("effective_dimension: negative eigenvalue");
        if (mu > 0.0) acc += mu / (mu + lambda);
    }
    return acc;
}

BoundCheck self_normalized_check(const std::vector<Eigen::VectorXd>& phis,
                                 const std::vector<double>& eps,
                                 const Eigen::MatrixXd& lambda0) {
    if (phis.size() != eps.size())
        throw KernelError("self_normalized_check: length mismatch");
    const int d = static_cast<int>(lambda0.rows());
    Eigen::MatrixXd lam = lambda0;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(d);
    double eps_norm2 = 0.0;
    for (std::size_t t = 0; t < phis.size(); ++t) {
        lam += phis[t] * phis[t].transpose();
        s += phis[t] * eps[t];
        eps_norm2 += eps[t] * eps[t];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(lam);
    if (llt.info() != Eigen::Success)
        throw KernelError("self_normalized_check: Lambda_t not PD");
    BoundCheck out;
    out.lhs = std::sqrt(s.dot(llt.solve(s)));
    out.rhs = std::sqrt(eps_norm2);
    out.holds = out.lhs <= out.rhs + 1e-9;
    return out;
}

BoundCheck elliptical_potential_check(const std::vector<Eigen::VectorXd>& phis,
                                      double lambda) {
    BoundCheck out;
    if (phis.empty()) {
        out.holds = true;
        return out;
    }
    const int d = static_cast<int>(phis[0].size());
    const int n = static_cast<int>(phis.size());
    Eigen::MatrixXd lam = lambda * Eigen::MatrixXd::Identity(d, d);
    double sum_bonus = 0.0;
    for (const auto& phi : phis) {
        sum_bonus += std::sqrt(phi.dot(lam.llt().solve(phi)));
        lam += phi * phi.transpose();
    }
    // lam now holds lambda I + sum of all outer products.
    Eigen::LLT<Eigen::MatrixXd> llt(lam);
    double logdet = 0.0;
    for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
    logdet = 2.0 * logdet - d * std::log(lambda);
    out.lhs = sum_bonus;
    out.rhs = std::sqrt(2.0 * n * logdet);
    out.holds = out.lhs <= out.rhs + 1e-9;
    return out;
}

Encoder grid_encoder(const GridWorldSpec& spec) {
    return [spec](int s, int a) {
        Eigen::VectorXd x =
            Eigen::VectorXd::Zero(spec.dims + spec.num_actions);
        auto coords = grid_coords(spec, s);
        for (int d = 0; d < spec.dims; ++d)
            x[d] = static_cast<double>(coords[d]) / (spec.side - 1);
        x[spec.dims + a] = 1.0;
        return x;
    };
}

Encoder index_encoder() {
    return [](int s, int a) {
        Eigen::VectorXd x(2);
        x << static_cast<double>(s), static_cast<double>(a);
        return x;
    };
}

}  // namespace rwtq
