#include "levy/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "levy/errors.hpp"
#include "levy/quadrature.hpp"

namespace levy {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlopeMargin = 1e-3;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double stable_density(const Stable& s, double y) {
    double c = y < 0 ? s.c1 : s.c2;
    return c * std::pow(std::abs(y), -s.alpha - 1.0);
}

// Drift that turns the |y| <= 1 compensated triplet into the closed-form stable exponent.
double stable_compensator_drift(const Stable& s) {
    double d = s.c2 - s.c1;
    if (s.alpha > 1.0) return -d / (s.alpha - 1.0);
    if (s.alpha < 1.0) return d / (1.0 - s.alpha);
    return -d * (1.0 - std::numbers::egamma);
}

cplx stable_unit_exponent(double alpha, double beta, double z) {
    if (z == 0.0) return 0.0;
    double az = std::abs(z), sg = z > 0 ? 1.0 : -1.0;
    if (alpha == 1.0) {
        return az * cplx(1.0, beta * (2.0 / kPi) * sg * std::log(az));
    }
    return std::pow(az, alpha) * cplx(1.0, -beta * sg * std::tan(kPi * alpha / 2.0));
}

boost::math::quadrature::ooura_fourier_cos<double>& ooura_cos() {
    thread_local boost::math::quadrature::ooura_fourier_cos<double> integrator(1e-12, 8);
    return integrator;
}
boost::math::quadrature::ooura_fourier_sin<double>& ooura_sin() {
    thread_local boost::math::quadrature::ooura_fourier_sin<double> integrator(1e-12, 8);
    return integrator;
}

// Jump part J(z) = int (e^{izy} - 1 - izy 1_{|y|<=1}) nu'(y) dy for one half-line,
// y = s*u with u > 0.
cplx jump_half(const std::function<double(double)>& nu, double z, double s) {
    double zs = z * s;
    // Inner piece [0, 1]: near 0 use cancellation-free forms.
    // Below u0 the density is continued by its local power law and the product is formed in
    // logs: nu(s u) alone overflows long before the integrand does.
    const double u0 = 1e-30;
    const double nu0 = nu(s * u0);
    const double p0 = std::log(nu0 / nu(s * 2.0 * u0)) / std::log(2.0);
    auto weighted = [&](double factor, double u) {
        if (u >= u0) return factor * nu(s * u);
        if (factor == 0.0 || !(nu0 > 0.0) || !std::isfinite(p0)) return 0.0;
        double l = std::log(std::abs(factor)) + std::log(nu0) - p0 * std::log(u / u0);
        return std::copysign(std::exp(l), factor);
    };
    auto re_in = [&](double u) {
        double h = std::sin(0.5 * zs * u);
        return weighted(-2.0 * h * h, u);
    };
    auto im_in = [&](double u) {
        double v = zs * u;
        double d;
        if (std::abs(v) < 1e-3) {
            double v2 = v * v;
            d = -v * v2 / 6.0 * (1.0 - v2 / 20.0);
        } else {
            d = std::sin(v) - v;
        }
        return weighted(d, u);
    };
    double pieces = std::max(1.0, std::ceil(std::abs(z) / (2.0 * kPi)));
    double first = std::min(1.0, 1.0 / pieces);
    double re = quad::endpoint_singular(re_in, 0.0, first, 1e-13);
    double im = quad::endpoint_singular(im_in, 0.0, first, 1e-13);
    if (first < 1.0) {
        int n = static_cast<int>(std::ceil((1.0 - first) * pieces));
        double h = (1.0 - first) / n;
        for (int k = 0; k < n; ++k) {
            double lo = first + k * h, hi = lo + h;
            re += quad::fixed(re_in, lo, hi, 24);
            im += quad::fixed(im_in, lo, hi, 24);
        }
    }
    // Outer piece [1, inf): -int nu + int cos(zy) nu, and int sin(zy) nu.
    auto g = [&](double u) { return nu(s * (1.0 + u)); };
    double mass = quad::half_infinite(g, 0.0, 1e-13);
    double az = std::abs(zs);
    double cpart = 0.0, spart = 0.0;
    if (az > 0.0) {
        auto [ci, ce] = ooura_cos().integrate(g, az);
        auto [si, se] = ooura_sin().integrate(g, az);
        (void)ce;
        (void)se;
        double sg = zs > 0 ? 1.0 : -1.0;
        // cos(az(1+u)) = cos az cos(az u) - sin az sin(az u)
        cpart = std::cos(az) * ci - std::sin(az) * si;
        spart = sg * (std::sin(az) * ci + std::cos(az) * si);
    } else {
        cpart = mass;
    }
    re += cpart - mass;
    im += spart;
    return {re, im};
}

cplx jump_integral(const std::function<double(double)>& nu, double z) {
    if (z == 0.0) return 0.0;
    return jump_half(nu, z, 1.0) + jump_half(nu, z, -1.0);
}

std::function<double(double)> density_fn(const LevyModel& m) {
    return [&m](double y) { return levy_density(m, y); };
}

}  // namespace

std::string LevyModel::kind() const {
    return std::visit(overloaded{
                          [](const Gaussian&) { return std::string("gaussian"); },
                          [](const Stable&) { return std::string("stable"); },
                          [](const DampedStable&) { return std::string("damped_stable"); },
                          [](const VarianceGamma&) { return std::string("variance_gamma"); },
                          [](const NormalInverseGaussian&) { return std::string("nig"); },
                          [](const Meixner&) { return std::string("meixner"); },
                          [](const CompoundPoisson&) { return std::string("compound_poisson"); },
                          [](const Custom& c) { return c.name; },
                      },
                      spec);
}

Domain Domain::single(double lo, double hi) {
    Domain d;
    d.intervals.push_back({lo, hi});
    d.validate();
    return d;
}

void Domain::validate() const {
    if (intervals.empty()) throw DomainError("domain has no intervals");
    for (std::size_t k = 0; k < intervals.size(); ++k) {
        if (!(intervals[k].lo < intervals[k].hi)) throw DomainError("domain interval must satisfy lo < hi");
        if (k > 0 && !(intervals[k - 1].hi < intervals[k].lo))
            throw DomainError("domain intervals must be ordered and disjoint");
    }
}

bool Domain::contains(double x) const {
    return std::any_of(intervals.begin(), intervals.end(), [x](const Interval& i) { return i.contains(x); });
}

double Domain::length() const {
    double s = 0.0;
    for (const auto& i : intervals) s += i.length();
    return s;
}

double stable_unit_constant(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable exponent must lie in (0, 2)");
    if (alpha == 1.0) return 1.0 / kPi;
    return alpha / (2.0 * std::tgamma(1.0 - alpha) * std::cos(kPi * alpha / 2.0));
}

LevyModel gaussian_model(double A, double gamma) {
    LevyModel m;
    m.A = A;
    m.gamma = gamma;
    m.spec = Gaussian{};
    return m;
}

LevyModel stable_model(double alpha, double beta, double scale, double gamma) {
    if (alpha == 2.0) return gaussian_model(scale, gamma);
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable exponent must lie in (0, 2]");
    if (!(beta >= -1.0 && beta <= 1.0)) throw DomainError("stable skewness must lie in [-1, 1]");
    if (!(scale > 0.0)) throw DomainError("stable scale must be positive");
    Stable s;
    s.alpha = alpha;
    s.beta = beta;
    s.scale = scale;
    double c = scale * stable_unit_constant(alpha);
    s.c1 = c * (1.0 - beta);
    s.c2 = c * (1.0 + beta);
    LevyModel m;
    m.gamma = gamma;
    m.spec = s;
    return m;
}

LevyModel stable_model_from_constants(double alpha, double c1, double c2, double gamma) {
    if (!(c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0)) throw DomainError("stable constants must be nonnegative, not both zero");
    double u = stable_unit_constant(alpha);
    LevyModel m = stable_model(alpha, (c2 - c1) / (c1 + c2), 0.5 * (c1 + c2) / u, gamma);
    auto& s = std::get<Stable>(m.spec);
    s.c1 = c1;
    s.c2 = c2;
    return m;
}

LevyModel kac_cauchy_model() { return stable_model(1.0, 0.0, 2.0 / kPi); }

LevyModel damped_stable_model(const DampedStable& p, double gamma) {
    LevyModel m;
    m.gamma = gamma;
    m.spec = p;
    return m;
}

LevyModel variance_gamma_model(const VarianceGamma& p, double gamma) {
    LevyModel m;
    m.gamma = gamma;
    m.spec = p;
    return m;
}

LevyModel nig_model(double C, double beta, double gamma) {
    LevyModel m;
    m.gamma = gamma;
    m.spec = NormalInverseGaussian{C, beta};
    return m;
}

LevyModel meixner_model(double C, double beta, double gamma) {
    LevyModel m;
    m.gamma = gamma;
    m.spec = Meixner{C, beta};
    return m;
}

LevyModel laplace_compound_poisson_model(double weight, double rate, double gamma) {
    if (!(weight > 0.0 && rate > 0.0)) throw DomainError("laplace jump density needs positive weight and rate");
    CompoundPoisson cp;
    cp.density = [weight, rate](double y) { return weight * std::exp(-rate * std::abs(y)); };
    cp.mass = 2.0 * weight / rate;
    cp.shape = "laplace";
    cp.weight = weight;
    cp.rate = rate;
    LevyModel m;
    m.gamma = gamma;
    m.spec = cp;
    return m;
}

LevyModel compound_poisson_model(std::function<double(double)> density, double mass, double gamma) {
    CompoundPoisson cp;
    cp.density = std::move(density);
    cp.mass = mass;
    cp.shape = "callable";
    LevyModel m;
    m.gamma = gamma;
    m.spec = cp;
    return m;
}

LevyModel custom_model(const Custom& c, double A, double gamma) {
    LevyModel m;
    m.A = A;
    m.gamma = gamma;
    m.spec = c;
    return m;
}

double levy_density(const LevyModel& model, double y) {
    if (y == 0.0) throw DomainError("Lévy density is undefined at y = 0");
    double ay = std::abs(y);
    return std::visit(overloaded{
                          [](const Gaussian&) { return 0.0; },
                          [&](const Stable& s) { return stable_density(s, y); },
                          [&](const DampedStable& d) {
                              return y < 0 ? d.c1 * std::exp(-d.lambda1 * ay) * std::pow(ay, -d.alpha - 1.0)
                                           : d.c2 * std::exp(-d.lambda2 * ay) * std::pow(ay, -d.alpha - 1.0);
                          },
                          [&](const VarianceGamma& v) {
                              return y < 0 ? v.c1 * std::exp(-v.G * ay) / ay : v.c2 * std::exp(-v.M * ay) / ay;
                          },
                          [&](const NormalInverseGaussian& n) {
                              if (ay > 700.0) return 0.0;
                              return n.C * std::exp(n.beta * y) * boost::math::cyl_bessel_k(1, ay) / ay;
                          },
                          [&](const Meixner& mx) {
                              // e^{beta y}/(y sinh(pi y)) written to avoid overflow.
                              double e = std::exp(mx.beta * y - kPi * ay);
                              return mx.C * 2.0 * e / (ay * -std::expm1(-2.0 * kPi * ay));
                          },
                          [&](const CompoundPoisson& c) { return c.density(y); },
                          [&](const Custom& c) { return c.density(y); },
                      },
                      model.spec);
}

double triplet_drift(const LevyModel& model) {
    if (model.is_stable()) return model.gamma + stable_compensator_drift(model.stable());
    return model.gamma;
}

double triplet_A(const LevyModel& model) { return model.A; }

bool has_jumps(const LevyModel& model) { return !std::holds_alternative<Gaussian>(model.spec); }

double jump_mass(const LevyModel& model) {
    if (const auto* c = std::get_if<CompoundPoisson>(&model.spec)) return c->mass;
    if (std::holds_alternative<Gaussian>(model.spec)) return 0.0;
    if (const auto* c = std::get_if<Custom>(&model.spec)) {
        if (c->small_exponent < 1.0 && c->tail_exponent > 1.0) {
            auto f = [&](double y) { return c->density(y); };
            auto g = [&](double y) { return c->density(-y); };
            return quad::endpoint_singular(f, 0.0, 1.0) + quad::half_infinite(f, 1.0) +
                   quad::endpoint_singular(g, 0.0, 1.0) + quad::half_infinite(g, 1.0);
        }
    }
    return kInf;
}

cplx lk_exponent(const LevyModel& model, double z) {
    cplx v = cplx(0.5 * model.A * z * z, -triplet_drift(model) * z);
    if (has_jumps(model) && z != 0.0) v -= jump_integral(density_fn(model), z);
    return v;
}

cplx characteristic_exponent(const LevyModel& model, double z) {
    if (z == 0.0) return 0.0;
    if (model.is_stable()) {
        const auto& s = model.stable();
        return s.scale * stable_unit_exponent(s.alpha, s.beta, z) + cplx(0.5 * model.A * z * z, -model.gamma * z);
    }
    if (std::holds_alternative<Gaussian>(model.spec)) return cplx(0.5 * model.A * z * z, -model.gamma * z);
    return lk_exponent(model, z);
}

DensityValue transition_density_ex(const LevyModel& model, double x, double t) {
    if (!(t > 0.0)) throw DomainError("transition density needs t > 0");
    if (model.A <= 0.0 && std::isfinite(jump_mass(model))) {
        throw UnsupportedError(
            "exponent is bounded (finite jump mass, no diffusion): the law has an atom and no Fourier-integrable "
            "density; use the jump-chain representation");
    }
    const double target = std::log(1e12);
    double Z = 1.0;
    double reZ = 0.0;
    for (int k = 0; k < 60; ++k) {
        reZ = t * characteristic_exponent(model, Z).real();
        if (reZ >= target) break;
        Z *= 2.0;
    }
    if (reZ < target) throw UnsupportedError("exponent does not grow: density not Fourier-integrable; use the jump-chain representation");
    auto f = [&](double z) {
        cplx e = std::exp(cplx(0.0, -x * z) - t * characteristic_exponent(model, z));
        return e.real();
    };
    double h = std::min(Z / 32.0, 2.0 * kPi / (std::abs(x) + 1.0));
    int n = static_cast<int>(std::ceil(Z / h));
    n = std::min(n, 8192);
    h = Z / n;
    double s = quad::endpoint_singular(f, 0.0, h, 1e-14);
    for (int k = 1; k < n; ++k) s += quad::adaptive(f, k * h, (k + 1) * h, 1e-13);
    DensityValue dv;
    dv.value = s / kPi;
    dv.cutoff = Z;
    dv.tail_bound = std::exp(-reZ);
    return dv;
}

double transition_density(const LevyModel& model, double x, double t) {
    return transition_density_ex(model, x, t).value;
}

std::pair<double, double> density_exponents(const LevyModel& model) {
    if (std::holds_alternative<Gaussian>(model.spec)) return {0.0, kInf};
    if (const auto* c = std::get_if<Custom>(&model.spec)) return {c->small_exponent, c->tail_exponent};
    auto slope = [&](double y1, double y2) {
        double f1 = levy_density(model, y1), f2 = levy_density(model, y2);
        if (f1 <= 0.0 && f2 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
        if (f2 <= 0.0 || f1 <= 0.0) return kInf;
        return -std::log(f2 / f1) / std::log(y2 / y1);
    };
    double s0 = -kInf, sinf = kInf;
    bool any0 = false, anyinf = false;
    for (double sg : {1.0, -1.0}) {
        double a = slope(sg * 1e-7, sg * 2e-7);
        if (!std::isnan(a)) {
            s0 = std::max(s0, a);
            any0 = true;
        }
        double b = slope(sg * 1e4, sg * 2e4);
        if (!std::isnan(b)) {
            sinf = anyinf ? std::min(sinf, b) : b;
            anyinf = true;
        }
    }
    if (!any0) s0 = 0.0;
    if (!anyinf || sinf > 50.0) sinf = kInf;
    return {s0, sinf};
}

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) {
        bool structural = c.id.rfind("structure.", 0) == 0 || c.id == "levy_integrability";
        return !structural || !c.applicable || c.passed;
    });
}

const ConditionCheck* ValidationReport::find(const std::string& id) const {
    for (const auto& c : checks)
        if (c.id == id) return &c;
    return nullptr;
}

ValidationReport validate_model(const LevyModel& model) {
    ValidationReport r;
    auto add = [&](std::string id, std::string desc, bool applicable, bool passed, std::string detail = "") {
        r.checks.push_back({std::move(id), std::move(desc), applicable, passed, std::move(detail)});
    };
    add("structure.gaussian_coefficient", "Gaussian coefficient A >= 0", true, model.A >= 0.0);

    bool params = true;
    std::string pmsg;
    std::visit(overloaded{
                   [&](const Gaussian&) {},
                   [&](const Stable& s) {
                       params = s.alpha > 0 && s.alpha < 2 && s.beta >= -1 && s.beta <= 1 && s.scale > 0 &&
                                s.c1 >= 0 && s.c2 >= 0;
                       pmsg = "alpha in (0,2), beta in [-1,1], scale > 0";
                   },
                   [&](const DampedStable& d) {
                       params = d.c1 > 0 && d.c2 > 0 && d.lambda1 > 0 && d.lambda2 > 0 && d.alpha > 0 && d.alpha < 2;
                       pmsg = "C1, C2, lambda1, lambda2 > 0 and alpha in (0,2)";
                   },
                   [&](const VarianceGamma& v) {
                       params = v.c1 > 0 && v.c2 > 0 && v.G > 0 && v.M > 0;
                       pmsg = "C1, C2, G, M > 0";
                   },
                   [&](const NormalInverseGaussian& n) {
                       params = n.C > 0 && n.beta >= -1 && n.beta <= 1;
                       pmsg = "C > 0, beta in [-1,1]";
                   },
                   [&](const Meixner& m) {
                       params = m.C > 0 && m.beta > -kPi && m.beta < kPi;
                       pmsg = "C > 0, beta in (-pi, pi)";
                   },
                   [&](const CompoundPoisson& c) {
                       params = static_cast<bool>(c.density) && c.mass > 0 && std::isfinite(c.mass);
                       pmsg = "density callable with finite positive mass";
                   },
                   [&](const Custom& c) {
                       params = static_cast<bool>(c.density);
                       pmsg = "density callable present";
                   },
               },
               model.spec);
    add("structure.parameters", "variant parameter ranges", true, params, pmsg);
    if (!params) return r;

    if (model.is_stable()) {
        const auto& s = model.stable();
        add("structure.stable_no_diffusion", "stable models carry no Gaussian part", true, model.A == 0.0);
        double c = s.scale * stable_unit_constant(s.alpha);
        bool consistent = std::abs(s.c1 - c * (1 - s.beta)) <= 1e-12 * c && std::abs(s.c2 - c * (1 + s.beta)) <= 1e-12 * c;
        std::ostringstream os;
        os << "expected c1=" << c * (1 - s.beta) << " c2=" << c * (1 + s.beta) << " from (beta, scale)";
        add("structure.stable_constants", "density constants match (beta, scale)", true, consistent, os.str());
    }

    bool nonneg = true;
    if (has_jumps(model)) {
        for (double e = -6.0; e <= 3.0; e += 0.25) {
            for (double sg : {1.0, -1.0}) {
                double v = levy_density(model, sg * std::pow(10.0, e));
                if (!(v >= 0.0) || !std::isfinite(v)) nonneg = false;
            }
        }
    }
    add("structure.density_nonnegative", "nu'(y) >= 0 and finite on the probe grid", true, nonneg);

    auto [s0, sinf] = density_exponents(model);
    r.small_exponent = s0;
    r.tail_exponent = sinf;
    r.mass = jump_mass(model);
    bool jumps = has_jumps(model);
    auto lt = [](double s, double bound) { return s < bound - kSlopeMargin; };
    auto gt = [](double s, double bound) { return s > bound + kSlopeMargin; };
    std::ostringstream ex;
    ex << "s0=" << s0 << " s_inf=" << sinf;
    std::string e = ex.str();

    add("levy_integrability", "int y^2/(1+y^2) nu'(y) dy < inf", jumps, !jumps || (lt(s0, 3) && gt(sinf, 1)), e);
    add("tail_vanishes", "nu(x) -> 0 as |x| -> inf", jumps, !jumps || gt(sinf, 1), e);
    add("local_nu_integrable", "int |nu| and int |x| nu' finite on bounded sets", jumps, !jumps || lt(s0, 2), e);
    add("x_nu_vanishes_at_zero", "x nu(x) -> 0 as x -> 0", jumps, !jumps || lt(s0, 2), e);
    add("compensated_kernel_conditions", "int |k|, int |x nu| local; x k -> 0 and x^2 nu -> 0 at 0", jumps,
        !jumps || lt(s0, 3), e);
    add("finite_tail_first_moment", "int_x^inf |y| nu'(y) dy < inf on both half-axes", jumps, !jumps || gt(sinf, 2), e);

    bool cp = std::holds_alternative<CompoundPoisson>(model.spec) ||
              (std::holds_alternative<Custom>(model.spec) && lt(s0, 1) && gt(sinf, 1));
    {
        std::ostringstream os;
        os << "M=" << r.mass;
        add("finite_jump_mass", "M = int nu'(y) dy < inf", cp, lt(s0, 1) && gt(sinf, 1) && std::isfinite(r.mass),
            os.str());
    }
    add("square_integrable_density", "int nu'(y)^2 dy < inf", cp, lt(s0, 0.5) && gt(sinf, 0.5), e);
    return r;
}

}  // namespace levy
