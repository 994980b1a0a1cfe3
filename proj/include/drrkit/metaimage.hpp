#pragma once

#include <filesystem>

#include "drrkit/volume.hpp"

namespace drrkit {

/// Element types accepted in MetaImage headers.
enum class ElementType { Short, Float };

/// Reads a .mhd header and its raw companion. Errors carry the header key
/// at fault: MissingFile, MalformedHeader, UnsupportedElementType,
/// DataSizeMismatch.
Volume load_volume(const std::filesystem::path& header);

/// Writes `<stem>.mhd` + `<stem>.raw` next to each other. MET_FLOAT stores
/// values as IEEE binary32, MET_SHORT rounds to the nearest int16 (clamped).
void save_volume(const Volume& v, const std::filesystem::path& header, ElementType type = ElementType::Float);

/// Masks are stored as MET_SHORT {0,1}; any non-zero element loads as 1.
Mask load_mask(const std::filesystem::path& header);
void save_mask(const Mask& m, const std::filesystem::path& header);

/// 2D MET_FLOAT image (NDims = 2, DimSize = "cols rows").
ImageGrid2D load_image2d(const std::filesystem::path& header);
void save_image2d(const ImageGrid2D& img, const std::filesystem::path& header);

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples). Pixel values
/// are clamped to [0,1] and mapped linearly onto [0,65535].
void save_pgm16(const ImageGrid2D& img, const std::filesystem::path& path);

}  // namespace drrkit
