#pragma once

#include "qclring/comb.hpp"
#include "qclring/geometry.hpp"
#include "qclring/materials.hpp"

#include <memory>
#include <string>

namespace qclring {

// Device description read from an INI file. Sections:
//   [stack]          name = material, thickness_um       (top to bottom)
//   [doping]         name = cm^-3                         (missing -> 0)
//   [geometry]       ar_width, top_wg_width, spacing, spacer, lateral_cladding, lateral_doping
//   [active_region]  period, repeats, sheet_doping_cm2, ga_fraction, al_fraction
//   [materials]      table, <material>_mass_ratio, <material>_gamma, dn_dga, dn_dal, al2o3_index
//   [solver]         dx, dy, padding, averaging
//   [comb]           preset and any CombParams field
// All sections except [stack] are optional. Errors are ConfigError with the
// dotted path of the field.
struct DeviceConfig {
    CrossSection cs;
    MaterialOptions materials;
    std::string table_path;  // empty: default table
    GridSpec grid;
    double al2o3_index = 1.62;
    CombParams comb;
    std::string source;

    // Material database built from table_path and the options; cached.
    const MaterialDb& db() const;

private:
    mutable std::shared_ptr<MaterialTable> table_;
    mutable std::shared_ptr<MaterialDb> db_;
};

DeviceConfig parse_device_config(const std::string& text, const std::string& base_dir = ".");
DeviceConfig load_device_config(const std::string& path);

// Applies one `key = value` comb setting (also used for CLI overrides).
void set_comb_field(CombParams& p, const std::string& key, const std::string& value,
                    const std::string& path_prefix = "comb");

// Reference device of configs/narrow_waveguide.ini with the top waveguide
// width and spacing replaced (the spacer is the InP buffer).
CrossSection reference_cross_section(double top_wg_width = 3.0, double spacing = 3.0);

}  // namespace qclring
