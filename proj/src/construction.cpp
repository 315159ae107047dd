#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "levy/errors.hpp"
#include "levy/quasipotential.hpp"

namespace levy {

int FactorizationData::cell(double t) const {
    if (t < nodes.front() || t > nodes.back()) return -1;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    int k = static_cast<int>(it - nodes.begin()) - 1;
    return std::min(k, static_cast<int>(N1.size()) - 1);
}

double FactorizationData::n1(double t) const {
    int k = cell(t);
    return k < 0 ? 0.0 : N1[k];
}

double FactorizationData::n2(double t) const {
    int k = cell(t);
    return k < 0 ? 0.0 : N2[k];
}

double FactorizationData::q(double u, double v) const { return (n1(-v) * n2(u) - n2(-v) * n1(u)) / r; }

namespace {

// Walk t over [t0, t1] where t sits in cell i (moving right) and d - t in cell j (moving left);
// accumulate len * g(i, j) over the pieces where both are constant.
template <class G>
double walk(const std::vector<double>& nodes, double d, double t0, double t1, const G& g) {
    const int n = static_cast<int>(nodes.size()) - 1;
    if (t1 <= t0) return 0.0;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), t0);
    int i = std::clamp(static_cast<int>(it - nodes.begin()) - 1, 0, n - 1);
    double u0 = d - t0;
    auto jt = std::lower_bound(nodes.begin(), nodes.end(), u0);
    int j = std::clamp(static_cast<int>(jt - nodes.begin()) - 1, 0, n - 1);
    double t = t0, s = 0.0;
    while (t < t1 && i < n && j >= 0) {
        double ni = nodes[i + 1];
        double nj = d - nodes[j];
        double next = std::min({ni, nj, t1});
        if (next > t) s += (next - t) * g(i, j);
        t = next;
        if (next >= ni) ++i;
        if (next >= nj) --j;
    }
    return s;
}

}  // namespace

double FactorizationData::phi(double x, double y) const {
    x = std::clamp(x, -c, c);
    y = std::clamp(y, -c, c);
    const double d = x - y;
    const double up = std::min(c, c + d);
    if (up <= x) return 0.0;
    return walk(nodes, d, x, up, [&](int i, int j) { return (N1[j] * N2[i] - N2[j] * N1[i]) / r; });
}

double FactorizationData::majorant(double d) const {
    const double t0 = std::max(-c, d - c), t1 = std::min(c, d + c);
    return walk(nodes, d, t0, t1, [&](int i, int j) { return std::abs(N1[j] * N2[i]) + std::abs(N2[j] * N1[i]); }) /
           std::abs(r);
}

double GridTable::bilinear(double x, double y) const {
    auto locate = [](const std::vector<double>& g, double v, double& t) {
        auto it = std::upper_bound(g.begin(), g.end(), v);
        int k = std::clamp(static_cast<int>(it - g.begin()) - 1, 0, static_cast<int>(g.size()) - 2);
        t = std::clamp((v - g[k]) / (g[k + 1] - g[k]), 0.0, 1.0);
        return static_cast<std::size_t>(k);
    };
    double tx, ty;
    std::size_t i = locate(xs, x, tx), j = locate(ys, y, ty);
    double v00 = at(i, j), v01 = at(i, j + 1), v10 = at(i + 1, j), v11 = at(i + 1, j + 1);
    if (tx == 0.0 && ty == 0.0) return v00;
    return (1 - tx) * ((1 - ty) * v00 + ty * v01) + tx * ((1 - ty) * v10 + ty * v11);
}

namespace {

template <class F>
void parallel_rows(std::size_t rows, const F& f) {
    unsigned nt = std::max(1u, std::min(16u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < rows; i += nt) f(i);
        });
    for (auto& th : pool) th.join();
}

DiagonalSingularity diagonal_from(const ConvolutionKernel& k) {
    if (k.A_half > 0.0) return DiagonalSingularity::None;
    if (k.singularity == Singularity::Log) return DiagonalSingularity::Log;
    if (k.singularity == Singularity::Power) return DiagonalSingularity::None;
    return DiagonalSingularity::Power;
}

}  // namespace

QuasiPotentialKernel general_construction(const ConvolutionKernel& kernel, double c, const ConstructionOptions& opt) {
    if (!(c > 0.0)) throw DomainError("construction half-width must be positive");
    if (opt.n < 8) throw DomainError("construction needs at least 8 cells");
    const int n = opt.n;
    auto data = std::make_shared<FactorizationData>();
    data->c = c;
    data->nodes.resize(n + 1);
    for (int k = 0; k <= n; ++k) {
        double s = -1.0 + 2.0 * k / n;
        double sg = s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
        data->nodes[k] = c * sg * (1.0 - std::pow(1.0 - std::abs(s), opt.grading));
    }
    data->nodes.front() = -c;
    data->nodes.back() = c;
    std::vector<double> mid(n), h(n);
    for (int i = 0; i < n; ++i) {
        mid[i] = 0.5 * (data->nodes[i] + data->nodes[i + 1]);
        h[i] = data->nodes[i + 1] - data->nodes[i];
    }
    Eigen::MatrixXd M(n, n);
    parallel_rows(n, [&](std::size_t i) {
        for (int j = 0; j < n; ++j) M(i, j) = kernel.integral(data->nodes[j] - mid[i], data->nodes[j + 1] - mid[i]);
        M(i, i) += kernel.A_half;
    });
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    data->rcond = lu.rcond();
    Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    Eigen::VectorXd xm = Eigen::Map<Eigen::VectorXd>(mid.data(), n);
    Eigen::VectorXd s1 = lu.solve(one), s2 = lu.solve(xm);
    if (!s1.allFinite() || !s2.allFinite()) throw NumericalError("operator S is singular on the construction grid");
    data->N1.assign(s1.data(), s1.data() + n);
    data->N2.assign(s2.data(), s2.data() + n);
    double r = 0.0, rabs = 0.0;
    for (int j = 0; j < n; ++j) {
        r += data->N1[j] * h[j];
        rabs += std::abs(data->N1[j]) * h[j];
    }
    if (std::abs(r) <= 1e-12 * rabs) throw ValidationError("integral of N1 vanishes (r = 0): construction does not apply");
    data->r = r;
    data->ill_conditioned = data->rcond < opt.rcond_warn;

    auto grid = std::make_shared<GridTable>();
    grid->xs = data->nodes;
    grid->ys.reserve(n + 2);
    grid->ys.push_back(-c);
    grid->ys.insert(grid->ys.end(), mid.begin(), mid.end());
    grid->ys.push_back(c);
    grid->values.assign(grid->xs.size() * grid->ys.size(), 0.0);
    parallel_rows(grid->xs.size(), [&](std::size_t i) {
        for (std::size_t j = 0; j < grid->ys.size(); ++j)
            grid->values[i * grid->ys.size() + j] = data->phi(grid->xs[i], grid->ys[j]);
    });

    QuasiPotentialKernel k;
    k.kind = QPKind::GridBacked;
    k.lo = -c;
    k.hi = c;
    k.diagonal = diagonal_from(kernel);
    k.construction = data;
    k.grid = grid;
    std::shared_ptr<const FactorizationData> cd = data;
    k.eval_fn = [cd](double x, double y) { return cd->phi(x, y); };
    if (data->ill_conditioned) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "construction matrix is ill-conditioned (rcond = %.3g)", data->rcond);
        k.warning = buf;
    }
    return k;
}

namespace {

// Largest |Phi| along the cross-section x - y = d, by sampling and golden-section refinement.
double cross_section_max(const QuasiPotentialKernel& k, double d) {
    double x0 = std::max(k.lo, k.lo + d), x1 = std::min(k.hi, k.hi + d);
    if (x1 <= x0) return 0.0;
    auto f = [&](double x) { return std::abs(k(x, x - d)); };
    const int m = 128;
    int best = 0;
    double bv = -1.0;
    for (int i = 0; i <= m; ++i) {
        double v = f(x0 + (x1 - x0) * i / m);
        if (v > bv) {
            bv = v;
            best = i;
        }
    }
    double a = x0 + (x1 - x0) * std::max(0, best - 1) / m, b = x0 + (x1 - x0) * std::min(m, best + 1) / m;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = b - g * (b - a), c2 = a + g * (b - a);
    double f1 = f(c1), f2 = f(c2);
    for (int it = 0; it < 80 && b - a > 1e-15 * (x1 - x0); ++it) {
        if (f1 > f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - g * (b - a);
            f1 = f(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + g * (b - a);
            f2 = f(c2);
        }
    }
    return std::max({bv, f1, f2});
}

}  // namespace

MajorantReport majorant_check(const QuasiPotentialKernel& kernel, int n_probes, std::uint64_t seed) {
    MajorantReport rep;
    if (n_probes <= 0) return rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(kernel.lo, kernel.hi);
    const double wiener_max = kernel.kind == QPKind::WienerGreen ? 0.5 * (kernel.hi - kernel.lo) * kernel.scale_factor : 0.0;
    for (int p = 0; p < n_probes; ++p) {
        double x = U(rng), y = U(rng);
        if (x == y) continue;
        double v = std::abs(kernel(x, y));
        double bound;
        if (kernel.construction) {
            bound = kernel.construction->majorant(x - y);
        } else if (kernel.kind == QPKind::WienerGreen) {
            bound = wiener_max;
        } else {
            bound = cross_section_max(kernel, x - y);
        }
        ++rep.probes;
        if (bound > 0.0) rep.max_ratio = std::max(rep.max_ratio, v / bound);
        if (v > bound * (1.0 + 1e-10) + 1e-300) rep.violations.push_back({x, y, v, bound});
    }
    return rep;
}

void export_grid(const QuasiPotentialKernel& kernel, std::ostream& os, int n, bool uniform) {
    std::shared_ptr<const GridTable> g = kernel.grid;
    if (!g) {
        if (n < 1) throw DomainError("grid export needs n >= 1");
        auto t = std::make_shared<GridTable>();
        for (int i = 0; i <= n; ++i) t->xs.push_back(kernel.lo + (kernel.hi - kernel.lo) * i / n);
        if (uniform) {
            t->ys = t->xs;
        } else {
            // Staggered in y so the diagonal is never hit.
            t->ys.push_back(kernel.lo);
            for (int i = 0; i < n; ++i) t->ys.push_back(kernel.lo + (kernel.hi - kernel.lo) * (i + 0.5) / n);
            t->ys.push_back(kernel.hi);
        }
        for (double x : t->xs)
            for (double y : t->ys) {
                double v;
                if (x == y && kernel.diagonal != DiagonalSingularity::None && x > kernel.lo && x < kernel.hi)
                    v = std::numeric_limits<double>::infinity();
                else
                    v = kernel(x, y);
                t->values.push_back(v);
            }
        g = t;
    }
    nlohmann::json h = kernel.header();
    h["n"] = g->xs.size() - 1;
    h["nx"] = g->xs.size();
    h["ny"] = g->ys.size();
    if (!h.contains("conditioning")) h["conditioning"] = nullptr;
    os << "# " << h.dump() << "\n";
    os << "x,y,phi\n";
    char buf[96];
    for (std::size_t i = 0; i < g->xs.size(); ++i)
        for (std::size_t j = 0; j < g->ys.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", g->xs[i], g->ys[j], g->at(i, j));
            os << buf;
        }
}

QuasiPotentialKernel import_grid(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw ParseError("grid file must start with a '# {json}' header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line.substr(2));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad grid header: ") + e.what());
    }
    if (!h.contains("nx") || !h.contains("ny") || !h.contains("domain")) throw ParseError("grid header lacks nx, ny or domain");
    std::size_t nx = h["nx"].get<std::size_t>(), ny = h["ny"].get<std::size_t>();
    if (nx < 2 || ny < 2) throw ParseError("grid needs at least 2 x 2 points");
    if (!std::getline(is, line) || line != "x,y,phi") throw ParseError("expected column header 'x,y,phi'");
    auto g = std::make_shared<GridTable>();
    g->values.reserve(nx * ny);
    std::size_t count = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        double x, y, v;
        char tail;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &x, &y, &v, &tail) != 3)
            throw ParseError("malformed grid row: " + line);
        std::size_t i = count / ny, j = count % ny;
        if (i >= nx) throw ParseError("more grid rows than nx * ny");
        if (j == 0) g->xs.push_back(x);
        if (i == 0) g->ys.push_back(y);
        if (x != g->xs[i] || y != g->ys[j]) throw ParseError("grid rows are not a tensor product in row-major order");
        g->values.push_back(v);
        ++count;
    }
    if (count != nx * ny) throw ParseError("grid row count does not match nx * ny");
    for (std::size_t i = 1; i < nx; ++i)
        if (!(g->xs[i] > g->xs[i - 1])) throw ParseError("grid x values must increase");
    for (std::size_t j = 1; j < ny; ++j)
        if (!(g->ys[j] > g->ys[j - 1])) throw ParseError("grid y values must increase");
    QuasiPotentialKernel k;
    k.kind = QPKind::GridBacked;
    k.lo = h["domain"][0].get<double>();
    k.hi = h["domain"][1].get<double>();
    std::string diag = h.value("diagonal_singularity", std::string("none"));
    k.diagonal = diag == "log" ? DiagonalSingularity::Log
                 : diag == "integrable_power" ? DiagonalSingularity::Power
                                              : DiagonalSingularity::None;
    k.diagonal_exponent = h.value("diagonal_exponent", 0.0);
    k.scale_factor = h.value("scale_factor", 1.0);
    k.grid = g;
    k.imported_header = h;
    std::shared_ptr<const GridTable> cg = g;
    k.eval_fn = [cg](double x, double y) { return cg->bilinear(x, y); };
    return k;
}

}  // namespace levy
