#pragma once

// Stationary covariance kernels with a scale and a lengthscale.
//
// K(x, y) = sigma^2 * Phi(||x - y|| / lambda), where Phi is one of the
// half-integer Matern closed forms, the Gaussian exp(-r^2) or the inverse
// quadratic 1 / (1 + r^2). Phi(0) = 1 for every family.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace gpill {

using Point = Eigen::VectorXd;

enum class KernelFamily { Matern, Gaussian, InverseQuadratic };

/// Matern smoothness restricted to the half-integers with closed forms.
/// The enumerator value is 2*nu.
enum class MaternNu : int { Half = 1, ThreeHalves = 3, FiveHalves = 5, SevenHalves = 7 };

inline double nu_value(MaternNu nu) { return static_cast<int>(nu) / 2.0; }

inline MaternNu matern_nu_from_value(double nu) {
    for (MaternNu v : {MaternNu::Half, MaternNu::ThreeHalves, MaternNu::FiveHalves,
                       MaternNu::SevenHalves}) {
        if (nu == nu_value(v)) return v;
    }
    throw std::invalid_argument("unsupported Matern smoothness " + std::to_string(nu) +
                                " (expected 0.5, 1.5, 2.5 or 3.5)");
}

inline std::string_view family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::Matern: return "matern";
        case KernelFamily::Gaussian: return "gaussian";
        case KernelFamily::InverseQuadratic: return "inverse-quadratic";
    }
    return "unknown";
}

inline KernelFamily family_from_name(std::string_view name) {
    if (name == "matern") return KernelFamily::Matern;
    if (name == "gaussian") return KernelFamily::Gaussian;
    if (name == "inverse-quadratic" || name == "inverse_quadratic" || name == "iq")
        return KernelFamily::InverseQuadratic;
    throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

/// Unit-scale profile Phi at the scaled distance r = ||x - y|| / lambda.
inline double kernel_profile(KernelFamily family, MaternNu nu, double r) {
    switch (family) {
        case KernelFamily::Gaussian: return std::exp(-r * r);
        case KernelFamily::InverseQuadratic: return 1.0 / (1.0 + r * r);
        case KernelFamily::Matern: break;
    }
    // exp(-s) is already zero here; the polynomial factor would overflow to inf.
    if (r > 1e3) return 0.0;
    switch (nu) {
        case MaternNu::Half: return std::exp(-r);
        case MaternNu::ThreeHalves: {
            const double s = std::numbers::sqrt3 * r;
            return (1.0 + s) * std::exp(-s);
        }
        case MaternNu::FiveHalves: {
            const double s = std::sqrt(5.0) * r;
            return (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
        case MaternNu::SevenHalves: {
            const double s = std::sqrt(7.0) * r;
            return (1.0 + s + 2.0 * s * s / 5.0 + s * s * s / 15.0) * std::exp(-s);
        }
    }
    return 0.0;
}

class KernelSpec {
public:
    static KernelSpec matern(MaternNu nu, double sigma = 1.0, double lengthscale = 1.0) {
        return KernelSpec(KernelFamily::Matern, nu, sigma, lengthscale);
    }
    static KernelSpec gaussian(double sigma = 1.0, double lengthscale = 1.0) {
        return KernelSpec(KernelFamily::Gaussian, MaternNu::Half, sigma, lengthscale);
    }
    static KernelSpec inverse_quadratic(double sigma = 1.0, double lengthscale = 1.0) {
        return KernelSpec(KernelFamily::InverseQuadratic, MaternNu::Half, sigma, lengthscale);
    }

    KernelSpec(KernelFamily family, MaternNu nu, double sigma, double lengthscale)
        : family_(family), nu_(nu), sigma_(sigma), lengthscale_(lengthscale) {
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw std::invalid_argument("kernel scale sigma must be positive and finite");
        if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
            throw std::invalid_argument("kernel lengthscale must be positive and finite");
    }

    [[nodiscard]] KernelFamily family() const { return family_; }
    /// Only meaningful for the Matern family.
    [[nodiscard]] MaternNu nu() const { return nu_; }
    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] double variance() const { return sigma_ * sigma_; }
    [[nodiscard]] double lengthscale() const { return lengthscale_; }

    [[nodiscard]] KernelSpec with_lengthscale(double lengthscale) const {
        return {family_, nu_, sigma_, lengthscale};
    }
    [[nodiscard]] KernelSpec with_sigma(double sigma) const {
        return {family_, nu_, sigma, lengthscale_};
    }

    /// sigma^2 * Phi(r) for a scaled distance r.
    [[nodiscard]] double at_scaled_distance(double r) const {
        return variance() * kernel_profile(family_, nu_, r);
    }

    [[nodiscard]] double operator()(const Point& x, const Point& y) const {
        if (x.size() != y.size())
            throw std::invalid_argument("kernel evaluated on points of different dimension");
        return at_scaled_distance((x - y).norm() / lengthscale_);
    }

    friend bool operator==(const KernelSpec& a, const KernelSpec& b) {
        return a.family_ == b.family_ &&
               (a.family_ != KernelFamily::Matern || a.nu_ == b.nu_) &&
               a.sigma_ == b.sigma_ && a.lengthscale_ == b.lengthscale_;
    }

private:
    KernelFamily family_;
    MaternNu nu_;
    double sigma_;
    double lengthscale_;
};

inline double eval_kernel(const KernelSpec& spec, const Point& x, const Point& y) {
    return spec(x, y);
}

/// Fourier transform of the Matern profile for the spec's lengthscale,
///
///   lambda^d * sigma^2 Gamma(nu + d/2) / (pi^{d/2} Gamma(nu)) (2 nu)^nu
///            * (2 nu + lambda^2 ||xi||^2)^{-(nu + d/2)},
///
/// the transform (2 pi)^{-d} int Phi(x) exp(-i xi.x) dx, so that it integrates to sigma^2.
inline double matern_spectral_density(const KernelSpec& spec, const Point& xi) {
    if (spec.family() != KernelFamily::Matern)
        throw std::invalid_argument(
            "spectral density is only available for the Matern family");
    const double nu = nu_value(spec.nu());
    const double d = static_cast<double>(xi.size());
    const double lam = spec.lengthscale();
    const double log_prefactor = std::lgamma(nu + d / 2.0) - std::lgamma(nu) -
                                 (d / 2.0) * std::log(std::numbers::pi) +
                                 nu * std::log(2.0 * nu) + d * std::log(lam);
    const double q = 2.0 * nu + lam * lam * xi.squaredNorm();
    return spec.variance() * std::exp(log_prefactor - (nu + d / 2.0) * std::log(q));
}

}  // namespace gpill
