#pragma once

#include <vector>

namespace qclring {

struct Film {
    double n;             // real index, >= 1
    double thickness_um;  // > 0
};

// Films listed from the facet medium towards air.
struct CoatingStack {
    std::vector<Film> films;
    void validate() const;
};

// Normal-incidence power reflectivity between two real media.
double fresnel_reflectivity(double n1, double n2);

// Power reflectivity of a facet (semi-infinite n_facet) into air, through an
// optional coating, via the 2x2 characteristic matrix at wavenumber nu (cm^-1).
double facet_reflectivity(double n_facet, const CoatingStack& coating, double nu);

// Physical thickness (um) of a quarter-wave film of index n at nu (cm^-1).
double quarter_wave_thickness(double n, double nu);

constexpr double kAl2O3Index = 1.62;

}  // namespace qclring
