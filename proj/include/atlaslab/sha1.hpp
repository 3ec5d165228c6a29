#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace atlaslab {

// Plain SHA-1 (FIPS 180-1), enough for content addressing of artifacts.
std::string sha1_hex(std::string_view data);

// Hash of "blob <len>\0<data>", the same scheme git uses for file contents.
std::string git_blob_hash(std::string_view data);

}  // namespace atlaslab
