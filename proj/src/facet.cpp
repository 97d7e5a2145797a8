#include "qclring/facet.hpp"

#include "qclring/errors.hpp"

#include <cmath>
#include <complex>
#include <algorithm>

namespace qclring {

void CoatingStack::validate() const {
    for (size_t k = 0; k < films.size(); ++k) {
        if (!(films[k].n >= 1.0)) throw ValidationError("coating film " + std::to_string(k) + ": index must be >= 1");
        if (!(films[k].thickness_um > 0))
            throw ValidationError("coating film " + std::to_string(k) + ": thickness must be > 0");
    }
}

double fresnel_reflectivity(double n1, double n2) {
    double r = (n1 - n2) / (n1 + n2);
    return r * r;
}

double facet_reflectivity(double n_facet, const CoatingStack& coating, double nu) {
    if (!(n_facet >= 1.0)) throw ValidationError("facet index must be >= 1");
    coating.validate();
    const double n_air = 1.0;
    if (coating.films.empty()) return fresnel_reflectivity(n_facet, n_air);
    if (!(nu > 0)) throw ValidationError("wavenumber must be positive");

    using C = std::complex<double>;
    const double k0 = 2 * M_PI * nu * 1e-4;  // um^-1
    C m11 = 1, m12 = 0, m21 = 0, m22 = 1;
    for (const Film& f : coating.films) {
        double d = k0 * f.n * f.thickness_um;
        C a = std::cos(d), b = C(0, std::sin(d) / f.n), c = C(0, std::sin(d) * f.n), e = std::cos(d);
        C t11 = m11 * a + m12 * c, t12 = m11 * b + m12 * e;
        C t21 = m21 * a + m22 * c, t22 = m21 * b + m22 * e;
        m11 = t11, m12 = t12, m21 = t21, m22 = t22;
    }
    C B = m11 + m12 * n_air, Cc = m21 + m22 * n_air;
    C r = (n_facet * B - Cc) / (n_facet * B + Cc);
    double R = std::norm(r);
    return std::clamp(R, 0.0, 1.0);
}

double quarter_wave_thickness(double n, double nu) {
    if (!(n > 0) || !(nu > 0)) throw ValidationError("quarter-wave thickness needs positive index and wavenumber");
    return 1e4 / nu / (4 * n);
}

}  // namespace qclring
