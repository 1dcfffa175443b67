#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include "sentlab/model.hpp"

namespace sentlab::model {

// Binary checkpoint, little-endian: magic "DDEC", format version u32, a
// tagged config block, then one record per tensor (name length u32, UTF-8
// name, rank u32, dims u32[], f32 data row-major) in canonical order.
void save_checkpoint(const Parameters<float>& params, const ModelConfig& cfg,
                     const std::string& path);
void save_checkpoint(const Parameters<float>& params, const ModelConfig& cfg,
                     std::ostream& out);

std::pair<Parameters<float>, ModelConfig> load_checkpoint(
    const std::string& path);
std::pair<Parameters<float>, ModelConfig> load_checkpoint(std::istream& in);

// FNV-1a over the serialised checkpoint bytes, as 16 hex digits; stamps
// embedding dumps and eval reports with the exact producing model.
std::string model_fingerprint(const Parameters<float>& params,
                              const ModelConfig& cfg);

}  // namespace sentlab::model
