#pragma once

#include <filesystem>
#include <string>

#include "fct/models/embedder.hpp"
#include "fct/models/transformation.hpp"
#include "fct/training/side_info.hpp"

namespace fct::io {

// Network checkpoints: "FCTN" | format u32 | kind string | body | crc32 u32.
// Parameters and BatchNorm statistics are stored as f64, so a reload is
// bit-identical to the trained network.
void save_checkpoint(const EmbedderNet& net, const std::filesystem::path& path);
void save_checkpoint(const TransformationNet& net, const std::filesystem::path& path);
void save_checkpoint(const SideInfoModel& model, const std::filesystem::path& path);

EmbedderNet load_embedder(const std::filesystem::path& path);
TransformationNet load_transformation(const std::filesystem::path& path);
SideInfoModel load_side_info(const std::filesystem::path& path);

}  // namespace fct::io
