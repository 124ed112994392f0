#pragma once

#include "tsad/pipeline/pipeline.hpp"

#include <filesystem>
#include <iosfwd>

namespace tsad {

inline constexpr char kModelMagic[] = "TSADFP01";
inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary model file: the 8-byte magic, a u32 format version and a u32
/// section count, then sections of {4-byte tag, u64 length, CBOR payload,
/// u32 CRC-32 of the payload}. All integers are little-endian. Sections:
/// TMPL (template JSON), PIPE (assignment and seed), META (channels, training
/// span, fit timings and events) and STAT (one state per step, null when
/// stateless). Unknown tags are skipped.
void save_model(std::ostream& out, const FittedPipeline& fitted);
void save_model(const std::filesystem::path& path, const FittedPipeline& fitted);

/// Throws CorruptModel for a bad magic, an unsupported version, a truncated
/// or checksum-failing section, or content that does not rebuild the
/// pipeline. Io when the file cannot be read.
FittedPipeline load_model(std::istream& in);
FittedPipeline load_model(const std::filesystem::path& path);

}  // namespace tsad
