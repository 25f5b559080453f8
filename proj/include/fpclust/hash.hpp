#pragma once

#include <string>
#include <string_view>

namespace fpclust {

/// Lower-case hex SHA-1 of "blob <size>\0<content>", as git hashes blobs.
std::string git_blob_hash(std::string_view content);

}  // namespace fpclust
