#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "levy/errors.hpp"
#include "levy/quadrature.hpp"
#include "levy/spectral.hpp"

namespace levy {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class F>
void parallel_for(int n, const F& f) {
    unsigned nt = std::max(1u, std::min(16u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (unsigned t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = static_cast<int>(t); i < n; i += static_cast<int>(nt)) f(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

double eval_checked(const QuasiPotentialKernel& k, double x, double y) {
    double v;
    try {
        v = k(x, y);
    } catch (const std::exception& e) {
        char buf[96];
        std::snprintf(buf, sizeof buf, " at (x, y) = (%.17g, %.17g)", x, y);
        throw NumericalError(std::string("kernel evaluation failed: ") + e.what() + buf);
    }
    if (!std::isfinite(v)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "non-finite kernel value at (x, y) = (%.17g, %.17g)", x, y);
        throw NumericalError(buf);
    }
    return v;
}

}  // namespace

void NystromSystem::interpolation_row(double x, Eigen::VectorXd& row, double& defect) const {
    const int n = size();
    row.resize(n);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
        row[j] = x == nodes[j] ? 0.0 : weights[j] * eval_checked(*kernel, x, nodes[j]);
        s += row[j];
    }
    defect = kernel->row_integral(x) - s;
}

NystromSystem assemble(const QuasiPotentialKernel& kernel, int n) {
    if (n < 16) throw DomainError("Nystrom assembly needs at least 16 nodes");
    NystromSystem sys;
    sys.kernel = std::make_shared<QuasiPotentialKernel>(kernel);
    sys.lo = kernel.lo;
    sys.hi = kernel.hi;
    quad::Rule r = quad::gauss_legendre(n, kernel.lo, kernel.hi);
    sys.nodes = r.x;
    sys.weights = r.w;
    sys.row_integrals.assign(n, 0.0);
    sys.matrix.resize(n, n);
    parallel_for(n, [&](int i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double v = sys.weights[j] * eval_checked(kernel, sys.nodes[i], sys.nodes[j]);
            sys.matrix(i, j) = v;
            s += v;
        }
        sys.row_integrals[i] = kernel.row_integral(sys.nodes[i]);
        sys.matrix(i, i) = sys.row_integrals[i] - s;
    });
    return sys;
}

cplx SpectralDecomposition::g(int k, double x) const {
    const auto& S = *system;
    for (int j = 0; j < S.size(); ++j)
        if (S.nodes[j] == x) return right(j, k);
    Eigen::VectorXd row;
    double defect;
    S.interpolation_row(x, row, defect);
    cplx s = 0.0;
    for (int j = 0; j < S.size(); ++j) s += row[j] * right(j, k);
    return s / (eigenvalues[k] - defect);
}

Eigen::VectorXcd SpectralDecomposition::h(int k) const {
    const auto& S = *system;
    Eigen::VectorXcd v(S.size());
    for (int i = 0; i < S.size(); ++i) v[i] = left(k, i) / S.weights[i];
    return v;
}

cplx SpectralDecomposition::h_integral(int k, double lo, double hi) const {
    const auto& S = *system;
    lo = std::max(lo, S.lo);
    hi = std::min(hi, S.hi);
    if (hi <= lo) return 0.0;
    if (lo == S.lo && hi == S.hi) return h_integrals[k];
    // int_{sub} h = (1/lambda) sum_j y_j int_{sub} Phi(x_j, x) dx
    cplx s = 0.0;
    for (int j = 0; j < S.size(); ++j) s += left(k, j) * S.kernel->integral_y(S.nodes[j], lo, hi);
    return s / eigenvalues[k];
}

SpectralDecomposition eigensystem(const NystromSystem& sys, int k) {
    const int n = sys.size();
    if (k <= 0 || k > n) k = n;
    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.matrix, true);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solver did not converge");
    Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::MatrixXcd V = es.eigenvectors();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double ma = std::abs(ev[a]), mb = std::abs(ev[b]);
        if (ma != mb) return ma > mb;
        return ev[a].imag() > ev[b].imag();
    });
    Eigen::MatrixXcd Vs(n, n);
    for (int c = 0; c < n; ++c) Vs.col(c) = V.col(order[c]);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Vs);
    SpectralDecomposition dec;
    dec.system = std::make_shared<NystromSystem>(sys);
    dec.eigvec_rcond = lu.rcond();
    Eigen::MatrixXcd Y = lu.inverse();

    // Symmetric after the sqrt(w) similarity: off-diagonal M_ij / w_j symmetric.
    double asym = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double a = sys.matrix(i, j) / sys.weights[j], b = sys.matrix(j, i) / sys.weights[i];
            asym = std::max(asym, std::abs(a - b));
            scale = std::max(scale, std::abs(a));
        }
    dec.symmetric = asym <= 1e-12 * std::max(scale, 1e-300);

    dec.eigenvalues.resize(k);
    dec.right.resize(n, k);
    dec.left.resize(k, n);
    dec.h_integrals.resize(k);
    dec.defective.assign(k, false);
    for (int c = 0; c < k; ++c) {
        dec.eigenvalues[c] = ev[order[c]];
        Eigen::VectorXcd g = Vs.col(c);
        Eigen::RowVectorXcd y = Y.row(c);
        // Normalize g to unit weighted norm; y keeps y.g = 1.
        double nrm = 0.0;
        for (int i = 0; i < n; ++i) nrm += sys.weights[i] * std::norm(g[i]);
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0)) throw NumericalError("zero eigenvector");
        // Rotate so that int g is real and positive when it is not negligible.
        cplx ig = 0.0;
        for (int i = 0; i < n; ++i) ig += sys.weights[i] * g[i];
        cplx phase = std::abs(ig) > 1e-12 * nrm ? std::abs(ig) / ig : cplx(1.0);
        g *= phase / nrm;
        y *= nrm / phase;
        double ynorm = 0.0;
        for (int i = 0; i < n; ++i) ynorm += std::norm(y[i]) / sys.weights[i];
        double kappa = std::sqrt(ynorm);  // ||h|| for ||g|| = 1
        if (!std::isfinite(kappa) || kappa > 1e12)
            throw NumericalError("bi-orthogonal normalization breaks down (left and right eigenvectors nearly orthogonal)");
        dec.defective[c] = kappa > 1e8;
        dec.right.col(c) = g;
        dec.left.row(c) = y;
        dec.h_integrals[c] = y.sum();
    }
    return dec;
}

std::string to_string(SurvivalMethod m) {
    switch (m) {
        case SurvivalMethod::SpectralSeries: return "spectral-series";
        case SurvivalMethod::Asymptotic: return "asymptotic";
        case SurvivalMethod::Resolvent: return "resolvent";
    }
    return "spectral-series";
}

int default_terms(const SpectralDecomposition& dec) {
    if (dec.eigenvalues.empty()) return 0;
    double l1 = std::abs(dec.eigenvalues[0]);
    int k = 0;
    for (const auto& l : dec.eigenvalues)
        if (std::abs(l) / l1 > 1e-3) ++k;
    return std::min(k, 50);
}

namespace {

std::vector<cplx> coefficients(const SpectralDecomposition& dec, int upto) {
    std::vector<cplx> c(upto);
    for (int k = 0; k < upto; ++k) c[k] = dec.g(k, 0.0) * dec.h_integrals[k];
    return c;
}

void require_origin(const SpectralDecomposition& dec) {
    if (!(dec.system->lo < 0.0 && dec.system->hi > 0.0))
        throw DomainError("survival from the origin needs 0 inside the domain");
}

}  // namespace

SurvivalEstimate survival_series(const SpectralDecomposition& dec, const std::vector<double>& times, int terms) {
    require_origin(dec);
    const int n = dec.size();
    if (terms <= 0) terms = default_terms(dec);
    terms = std::min(terms, n);
    // Coefficients beyond the truncation feed the remainder estimate.
    const int extra = std::min(n, terms + 50);
    auto c = coefficients(dec, extra);
    SurvivalEstimate est;
    est.method = SurvivalMethod::SpectralSeries;
    est.terms = terms;
    est.lambda1 = dec.eigenvalues[0].real();
    est.c1 = c[0].real();
    bool warned = false;
    for (double t : times) {
        if (!(t > 0.0)) throw DomainError("survival times must be positive");
        cplx s = 0.0;
        for (int k = 0; k < terms; ++k) s += c[k] * std::exp(-t / dec.eigenvalues[k]);
        double rem = 0.0;
        for (int k = terms; k < extra; ++k) rem += std::abs(c[k] * std::exp(-t / dec.eigenvalues[k]));
        if (terms < n && terms < extra) {
            // Tail beyond the retained coefficients, bounded by the next modulus.
            double decay = std::exp(-t * (1.0 / dec.eigenvalues[std::min(extra, n - 1)]).real());
            rem += decay;
        }
        est.times.push_back(t);
        est.values.push_back(s.real());
        est.remainder_bounds.push_back(rem);
        if (rem > 1e-2 && !warned) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "truncation bound %.3g exceeds 1e-2 at t = %.4g; series is meant for moderate t",
                          rem, t);
            est.warnings.push_back(buf);
            warned = true;
        }
    }
    return est;
}

double survival_series(const SpectralDecomposition& dec, double t, int terms) {
    return survival_series(dec, std::vector<double>{t}, terms).values.front();
}

LeadingAsymptotics leading_asymptotics(const SpectralDecomposition& dec) {
    require_origin(dec);
    if (dec.eigenvalues.empty()) throw NumericalError("empty spectrum");
    cplx l1 = dec.eigenvalues[0];
    if (!(l1.real() > 0.0) || std::abs(l1.imag()) > 1e-10 * std::abs(l1))
        throw NumericalError("leading eigenvalue is not real and positive");
    if (dec.size() > 1 && std::abs(dec.eigenvalues[1]) >= std::abs(l1) * (1.0 - 1e-8))
        throw NumericalError("leading eigenvalue is not simple: rank-one hypothesis fails (possible multiplicity)");
    LeadingAsymptotics la;
    la.lambda1 = l1.real();
    la.c1 = (dec.g(0, 0.0) * dec.h_integrals[0]).real();
    return la;
}

SurvivalEstimate asymptotic_survival(const SpectralDecomposition& dec, const std::vector<double>& times) {
    auto la = leading_asymptotics(dec);
    SurvivalEstimate est;
    est.method = SurvivalMethod::Asymptotic;
    est.lambda1 = la.lambda1;
    est.c1 = la.c1;
    est.terms = 1;
    for (double t : times) {
        if (!(t > 0.0)) throw DomainError("survival times must be positive");
        est.times.push_back(t);
        est.values.push_back(la.c1 * std::exp(-t / la.lambda1));
        est.remainder_bounds.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return est;
}

double conditional_asymptotics(const SpectralDecomposition& dec, double x0, const Interval& sub) {
    if (!(sub.lo < sub.hi)) throw DomainError("sub-interval must have lo < hi");
    if (sub.lo < dec.system->lo || sub.hi > dec.system->hi) throw DomainError("sub-interval must lie inside the domain");
    if (x0 < sub.lo || x0 > sub.hi) throw DomainError("starting point must lie in the sub-interval");
    return (dec.g(0, x0) * dec.h_integral(0, sub.lo, sub.hi)).real();
}

ResolventResult resolvent_psi(const NystromSystem& sys, double s) {
    if (!(s >= 0.0)) throw DomainError("resolvent parameter s must be nonnegative");
    if (!(sys.lo < 0.0 && sys.hi > 0.0)) throw DomainError("resolvent from the origin needs 0 inside the domain");
    const int n = sys.size();
    Eigen::VectorXd row;
    double D0;
    sys.interpolation_row(0.0, row, D0);
    Eigen::VectorXd phi0(n);
    bool origin_node = false;
    for (int j = 0; j < n; ++j) {
        if (sys.nodes[j] == 0.0) origin_node = true;
        phi0[j] = sys.nodes[j] == 0.0 ? 0.0 : row[j] / sys.weights[j];
    }
    if (origin_node) throw UnsupportedError("resolvent needs a grid without a node at the origin (use an even node count)");
    // B* on the grid: W^{-1} M^T W.
    Eigen::MatrixXd Bstar(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Bstar(i, j) = sys.matrix(j, i) * sys.weights[j] / sys.weights[i];
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) + s * Bstar;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    if (!(lu.rcond() > 1e-14)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "I + s B* is numerically singular at s = %.6g", s);
        throw NumericalError(buf);
    }
    Eigen::VectorXd psi = lu.solve(phi0);
    // int psi = (B u)(0) with u = (I + s B)^{-1} 1, evaluated with the same subtraction.
    Eigen::MatrixXd Bm = Eigen::MatrixXd::Identity(n, n) + s * sys.matrix;
    Eigen::VectorXd u = Bm.partialPivLu().solve(Eigen::VectorXd::Ones(n));
    double S1 = row.dot(u);
    ResolventResult res;
    res.s = s;
    res.integral = (S1 + D0) / (1.0 + s * D0);
    res.psi.grid = sys.nodes;
    res.psi.values.assign(psi.data(), psi.data() + n);
    return res;
}

double stable_scaling(double lambda1_unit, double a, double alpha) {
    if (!(a > 0.0)) throw DomainError("scale a must be positive");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    return std::pow(a, alpha) * lambda1_unit;
}

double stable_scaling(const LevyModel& model, double lambda1_unit, double a) {
    if (model.is_stable() && model.gamma == 0.0 && model.A == 0.0)
        return stable_scaling(lambda1_unit, a, model.stable().alpha);
    if (std::holds_alternative<Gaussian>(model.spec) && model.gamma == 0.0) return stable_scaling(lambda1_unit, a, 2.0);
    throw ValidationError("scaling law needs a strictly stable model");
}

RegimeResult regime_classify(double alpha, RegimeKind kind, double T, const SpectralDecomposition* unit_dec) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    switch (kind) {
        case RegimeKind::Infinity: return {RegimeLimit::LimitZero, 0.0};
        case RegimeKind::Zero: return {RegimeLimit::LimitOne, 1.0};
        case RegimeKind::Finite:
            if (!(T > 0.0)) throw DomainError("finite regime needs T > 0");
            if (!unit_dec) throw DomainError("finite regime needs the unit-interval decomposition");
            return {RegimeLimit::LimitPT, survival_series(*unit_dec, T)};
    }
    return {RegimeLimit::LimitZero, 0.0};
}

RegularityReport regularity_report(const NystromSystem& sys, const SpectralDecomposition& dec, int trials,
                                   std::uint64_t seed) {
    RegularityReport r;
    const int n = sys.size();
    const auto& K = *sys.kernel;
    r.min_phi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) r.min_phi = std::min(r.min_phi, sys.matrix(i, j) / sys.weights[j]);
    for (int j = 0; j < n; ++j) {
        for (double e : {sys.lo, sys.hi}) {
            r.max_boundary = std::max(r.max_boundary, std::abs(K(e, sys.nodes[j])));
            r.max_boundary = std::max(r.max_boundary, std::abs(K(sys.nodes[j], e)));
        }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01;
    r.trials = trials;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) f[i] = N01(rng);
        Eigen::VectorXd Bf = sys.matrix * f;
        double form = 0.0;
        for (int i = 0; i < n; ++i) form += sys.weights[i] * Bf[i] * f[i];
        double arg = form >= 0.0 ? 0.0 : kPi;
        r.sector_half_angle = std::max(r.sector_half_angle, arg);
    }
    const double l1 = dec.eigenvalues.front().real();
    r.disk_ok = r.unit_disk_ok = true;
    for (int k = 0; k < dec.size(); ++k) {
        cplx z = dec.eigenvalues[k];
        double dist = std::abs(z - 0.5 * l1);
        double excess = (dist - 0.5 * l1) / l1;
        r.max_disk_excess = std::max(r.max_disk_excess, excess);
        if (excess > 1e-8) r.disk_ok = false;
        if (std::abs(z - 0.5 * l1) > 0.5 + 1e-8) r.unit_disk_ok = false;
        if (k > 0 && std::abs(excess) <= 1e-8) {
            ++r.boundary_eigenvalues;
            if (dec.defective[k]) r.boundary_index_one = false;
        }
        r.max_imag = std::max(r.max_imag, std::abs(z.imag()));
        if (std::abs(z.imag()) > 1e-12 * l1) {
            bool found = false;
            for (int m = 0; m < dec.size() && !found; ++m)
                found = std::abs(dec.eigenvalues[m] - std::conj(z)) <= 1e-8 * l1;
            if (!found) r.conjugate_pairs = false;
        }
    }
    return r;
}

nlohmann::json spectrum_json(const SpectralDecomposition& dec, int max_eigenvalues) {
    nlohmann::json ev = nlohmann::json::array();
    for (int k = 0; k < std::min(dec.size(), max_eigenvalues); ++k)
        ev.push_back({{"re", dec.eigenvalues[k].real()}, {"im", dec.eigenvalues[k].imag()}});
    nlohmann::json j = {{"eigenvalues", ev},
                        {"lambda1", dec.eigenvalues.front().real()},
                        {"n", dec.system->size()},
                        {"kernel_kind", to_string(dec.system->kernel->kind)}};
    try {
        j["c1"] = leading_asymptotics(dec).c1;
    } catch (const LevyError& e) {
        j["c1"] = nullptr;
        j["c1_error"] = e.what();
    }
    return j;
}

void write_survival_csv(const SurvivalEstimate& est, std::ostream& os) {
    os << "t,p,method,err\n";
    char buf[128];
    for (std::size_t i = 0; i < est.times.size(); ++i) {
        double err = i < est.remainder_bounds.size() ? est.remainder_bounds[i] : 0.0;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%.17g\n", est.times[i], est.values[i],
                      to_string(est.method).c_str(), err);
        os << buf;
    }
}

}  // namespace levy
