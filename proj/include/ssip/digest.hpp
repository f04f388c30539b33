#pragma once

#include <string>

namespace ssip {

/// FNV-1a 64-bit hash of a string, hex-encoded; used as the config hash.
std::string fnv1a_hex(const std::string& text);

/// Git-style blob digest of raw content: sha1("blob <len>\0" + content).
std::string git_blob_sha1(const std::string& content);

/// Digest of a file's content; throws if the file cannot be read.
std::string file_blob_sha1(const std::string& path);

}  // namespace ssip
