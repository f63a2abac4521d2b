#pragma once

#include <string>
#include <string_view>

#include "stackres/partial.hpp"

namespace stackres {

inline constexpr int kPartialsFormatVersion = 1;

/// Canonical JSON for one file's partial-path set, in the (already sorted)
/// order of `partials.paths`. Node ids are stored as file-local indices.
std::string serialize_partials(const StackGraph& graph, FileId file, const FilePartials& partials);

/// Inverse of serialize_partials; symbols are interned into `graph` and
/// local ids are bound to `file`, which must already be loaded.
FilePartials load_partials(StackGraph& graph, FileId file, std::string_view record);

}  // namespace stackres
