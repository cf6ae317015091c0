#pragma once

#include <map>
#include <string>
#include <vector>

#include "convfem/interp.hpp"
#include "convfem/mesh.hpp"

namespace convfem {

enum class EnrichmentMode { plain_fe, conv };

EnrichmentMode enrichment_mode_from_name(const std::string& name);
const char* enrichment_mode_name(EnrichmentMode mode);

// Region-wise enrichment assignment: which elements carry convolution shape
// functions and which keep plain FE interpolation.
struct EnrichmentMap {
    std::vector<EnrichmentMode> modes; // one entry per element
    ConvConfig cfg;                    // shared by all conv elements

    bool any_conv() const;
    bool all_conv() const;
    // Nodes of conv-classified elements; these need patch bases.
    std::vector<int> conv_nodes(const Mesh& mesh) const;
};

// Elements whose region tag appears in `regions` take that mode, all others
// take `fallback`. Throws on a tag that exists in `regions` but not in the
// mesh.
EnrichmentMap classify_enrichment(const Mesh& mesh,
                                  const std::map<std::string, EnrichmentMode>& regions,
                                  EnrichmentMode fallback, const ConvConfig& cfg);

EnrichmentMap uniform_enrichment(const Mesh& mesh, EnrichmentMode mode,
                                 const ConvConfig& cfg);

} // namespace convfem
