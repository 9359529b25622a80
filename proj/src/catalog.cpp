#include "lightguide/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lightguide/error.hpp"

namespace lightguide {

double Distribution::intensity(double flux, double theta) const {
    switch (type) {
        case DistributionType::isotropic:
            return flux / (4.0 * kPi);
        case DistributionType::cosine_lobe: {
            const double c = std::cos(theta);
            if (c <= 0.0) return 0.0;
            // Normalized so the lobe integrates to `flux` over the lower hemisphere.
            return flux * (exponent + 1.0) / (2.0 * kPi) * std::pow(c, exponent);
        }
        case DistributionType::tabulated: {
            const double deg = theta * 180.0 / kPi;
            if (angles_deg.empty() || deg > angles_deg.back()) return 0.0;
            auto it = std::upper_bound(angles_deg.begin(), angles_deg.end(), deg);
            if (it == angles_deg.begin()) return cd_per_klm.front() * flux / 1000.0;
            if (it == angles_deg.end()) return cd_per_klm.back() * flux / 1000.0;
            const auto hi = static_cast<std::size_t>(it - angles_deg.begin());
            const auto lo = hi - 1;
            const double t = (deg - angles_deg[lo]) / (angles_deg[hi] - angles_deg[lo]);
            return (cd_per_klm[lo] + t * (cd_per_klm[hi] - cd_per_klm[lo])) * flux / 1000.0;
        }
    }
    return 0.0;
}

namespace {

void validate_model(const LuminaireModel& m) {
    auto fail = [&](const std::string& what) {
        throw ValidationError("luminaire model '" + m.id + "': " + what);
    };
    if (m.id.empty()) throw ValidationError("luminaire model with empty id");
    if (m.collection.empty() || m.version.empty()) fail("collection and version are required");
    if (!(m.flux > 0.0)) fail("flux must be > 0");
    if (!(m.cct > 0.0)) fail("cct must be > 0");
    if (!(m.cri >= 0.0 && m.cri <= 100.0)) fail("cri must be in [0, 100]");
    if (!(m.luminous_area > 0.0)) fail("luminous_area must be > 0");
    const auto& d = m.distribution;
    if (d.type == DistributionType::cosine_lobe && !(d.exponent >= 0.0)) fail("cosine-lobe exponent must be >= 0");
    if (d.type == DistributionType::tabulated) {
        if (d.angles_deg.size() < 2 || d.angles_deg.size() != d.cd_per_klm.size())
            fail("tabulated curve needs >= 2 matching angle/value entries");
        if (d.angles_deg.front() != 0.0) fail("tabulated curve must start at 0 degrees");
        for (std::size_t i = 1; i < d.angles_deg.size(); ++i)
            if (!(d.angles_deg[i] > d.angles_deg[i - 1])) fail("tabulated angles must be strictly ascending");
        if (d.angles_deg.back() > 180.0) fail("tabulated angles must be <= 180");
        for (double v : d.cd_per_klm)
            if (!(v >= 0.0)) fail("tabulated curve values must be >= 0");
    }
    if (m.mount == MountType::pendant && !(m.min_height > 0.0 && m.max_height >= m.min_height))
        fail("pendant models need a legal height range 0 < min_height <= max_height");
}

// Compares the shape only: tabulated curves scale with flux, lobes are normalized.
bool same_shape(const Distribution& a, const Distribution& b) { return a == b; }

}  // namespace

Catalog::Catalog(std::vector<LuminaireModel> models) : models_(std::move(models)) {
    std::set<std::string> ids;
    std::set<std::pair<std::string, std::string>> seen_versions;
    for (const auto& m : models_) {
        validate_model(m);
        if (!ids.insert(m.id).second) throw ValidationError("duplicate luminaire model id '" + m.id + "'");
        if (!seen_versions.insert({m.collection, m.version}).second)
            throw ValidationError("duplicate version '" + m.version + "' in collection '" + m.collection + "'");
    }
    for (const auto& c : collections()) {
        const auto vs = versions(c);
        for (const auto* v : vs) {
            if (!same_shape(v->distribution, vs.front()->distribution))
                throw ValidationError("collection '" + c + "': versions must share the distribution shape");
            if (v->mount != vs.front()->mount)
                throw ValidationError("collection '" + c + "': versions must share the mount type");
        }
    }
}

const LuminaireModel* Catalog::find(const std::string& id) const {
    auto it = std::find_if(models_.begin(), models_.end(), [&](const auto& m) { return m.id == id; });
    return it == models_.end() ? nullptr : &*it;
}

const LuminaireModel& Catalog::model(const std::string& id) const {
    if (const auto* m = find(id)) return *m;
    throw UnknownIdError("unknown luminaire model '" + id + "'");
}

const LuminaireModel& Catalog::lookup(const std::string& collection, const std::string& version) const {
    bool collection_seen = false;
    for (const auto& m : models_) {
        if (m.collection != collection) continue;
        collection_seen = true;
        if (m.version == version) return m;
    }
    if (!collection_seen) throw UnknownIdError("unknown collection '" + collection + "'");
    throw UnknownIdError("unknown version '" + version + "' in collection '" + collection + "'");
}

std::vector<std::string> Catalog::collections() const {
    std::vector<std::string> out;
    for (const auto& m : models_)
        if (std::find(out.begin(), out.end(), m.collection) == out.end()) out.push_back(m.collection);
    return out;
}

std::vector<const LuminaireModel*> Catalog::versions(const std::string& collection) const {
    std::vector<const LuminaireModel*> out;
    for (const auto& m : models_)
        if (m.collection == collection) out.push_back(&m);
    return out;
}

std::string to_string(MountType m) { return m == MountType::pendant ? "pendant" : "surface"; }

std::string to_string(DistributionType t) {
    switch (t) {
        case DistributionType::isotropic: return "isotropic";
        case DistributionType::cosine_lobe: return "cosine_lobe";
        case DistributionType::tabulated: return "tabulated";
    }
    return "isotropic";
}

}  // namespace lightguide
