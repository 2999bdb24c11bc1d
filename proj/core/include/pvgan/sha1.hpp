#pragma once

#include <cstddef>
#include <string>

namespace pvgan {

// Lowercase hex SHA-1 digest.
std::string sha1_hex(const void* data, std::size_t len);
std::string sha1_hex(const std::string& s);

// Git blob object id of the given content: sha1("blob <len>\0<content>").
std::string git_blob_hash(const std::string& content);

}  // namespace pvgan
