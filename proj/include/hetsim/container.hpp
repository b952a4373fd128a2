#pragma once

#include <string>

#include "hetsim/hetgraph.hpp"

namespace hetsim {

// Versioned graph container file. Layout:
//   bytes 0..3   magic "HGC1"
//   bytes 4..7   little-endian u32 header length
//   header       UTF-8 JSON (schema, relations, target, labels)
//   edge data    per relation, in relation order: little-endian u32 (src, dst)
//                pairs, destination-major
//   feature data per dense node type, in type order: little-endian f32,
//                row-major [count x dim]
// Round-trips are bit-exact: save(load(f)) == f.
void save_container(const HetGraph& g, const std::string& path);
HetGraph load_container(const std::string& path);

}  // namespace hetsim
