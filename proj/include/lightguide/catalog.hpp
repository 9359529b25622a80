#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lightguide/geometry.hpp"

namespace lightguide {

enum class DistributionType { isotropic, cosine_lobe, tabulated };

/// Luminous intensity distribution of a luminaire, rotationally symmetric
/// about its aim direction.
struct Distribution {
    DistributionType type = DistributionType::isotropic;
    double exponent = 1.0;                ///< cosine-lobe exponent
    std::vector<double> angles_deg;       ///< tabulated polar angles, ascending from 0
    std::vector<double> cd_per_klm;       ///< tabulated intensity per 1000 lm

    /// Intensity in candela for a luminaire of `flux` lumens, at `theta`
    /// radians off the aim axis.
    double intensity(double flux, double theta) const;

    /// Same shape, compared field by field.
    friend bool operator==(const Distribution&, const Distribution&) = default;
};

enum class MountType { pendant, surface };

struct LuminaireModel {
    std::string id;
    std::string collection;
    std::string version;
    double flux = 0.0;          ///< lm
    double cct = 0.0;           ///< K
    double cri = 0.0;           ///< 0..100
    Distribution distribution;
    MountType mount = MountType::surface;
    double luminous_area = 0.0; ///< m^2, used for glare luminance
    double min_height = 0.0;    ///< pendant: lowest legal mounting height above the floor
    double max_height = 0.0;    ///< pendant: highest legal mounting height
};

/// Immutable set of luminaire models grouped into collections of versions.
class Catalog {
public:
    Catalog() = default;
    /// Validates every model and the collection invariants; throws ValidationError.
    explicit Catalog(std::vector<LuminaireModel> models);

    const std::vector<LuminaireModel>& models() const { return models_; }

    /// Throws UnknownIdError.
    const LuminaireModel& model(const std::string& id) const;
    const LuminaireModel* find(const std::string& id) const;

    /// Throws UnknownIdError naming the missing collection or version.
    const LuminaireModel& lookup(const std::string& collection, const std::string& version) const;

    /// Collection ids in first-appearance order.
    std::vector<std::string> collections() const;
    /// Models of one collection in catalog order.
    std::vector<const LuminaireModel*> versions(const std::string& collection) const;

private:
    std::vector<LuminaireModel> models_;
};

using CatalogPtr = std::shared_ptr<const Catalog>;

std::string to_string(MountType m);
std::string to_string(DistributionType t);

}  // namespace lightguide
