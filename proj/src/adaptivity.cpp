#include "convfem/adaptivity.hpp"

#include <algorithm>
#include <set>

namespace convfem {

EnrichmentMode enrichment_mode_from_name(const std::string& name) {
    if (name == "fem" || name == "plain_fe") return EnrichmentMode::plain_fe;
    if (name == "conv") return EnrichmentMode::conv;
    throw ValidationError("unknown enrichment mode '" + name + "' (expected fem|conv)");
}

const char* enrichment_mode_name(EnrichmentMode mode) {
    return mode == EnrichmentMode::conv ? "conv" : "fem";
}

bool EnrichmentMap::any_conv() const {
    return std::any_of(modes.begin(), modes.end(),
                       [](EnrichmentMode m) { return m == EnrichmentMode::conv; });
}

bool EnrichmentMap::all_conv() const {
    return std::all_of(modes.begin(), modes.end(),
                       [](EnrichmentMode m) { return m == EnrichmentMode::conv; });
}

std::vector<int> EnrichmentMap::conv_nodes(const Mesh& mesh) const {
    std::set<int> nodes;
    for (int e = 0; e < mesh.element_count(); ++e)
        if (modes[e] == EnrichmentMode::conv)
            nodes.insert(mesh.elements[e].nodes.begin(), mesh.elements[e].nodes.end());
    return {nodes.begin(), nodes.end()};
}

EnrichmentMap classify_enrichment(const Mesh& mesh,
                                  const std::map<std::string, EnrichmentMode>& regions,
                                  EnrichmentMode fallback, const ConvConfig& cfg) {
    std::set<std::string> mesh_tags;
    for (const auto& [e, tag] : mesh.region_tags) mesh_tags.insert(tag);
    for (const auto& [tag, mode] : regions)
        if (!mesh_tags.count(tag))
            throw ValidationError("unknown region tag '" + tag + "'");

    EnrichmentMap map;
    map.cfg = cfg;
    map.modes.assign(mesh.element_count(), fallback);
    for (const auto& [e, tag] : mesh.region_tags) {
        auto it = regions.find(tag);
        if (it != regions.end()) map.modes[e] = it->second;
    }
    return map;
}

EnrichmentMap uniform_enrichment(const Mesh& mesh, EnrichmentMode mode,
                                 const ConvConfig& cfg) {
    EnrichmentMap map;
    map.cfg = cfg;
    map.modes.assign(mesh.element_count(), mode);
    return map;
}

} // namespace convfem
