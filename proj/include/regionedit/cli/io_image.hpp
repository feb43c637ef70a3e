#pragma once

#include <string>

#include "regionedit/types.hpp"

namespace regionedit::cli {

/// Reads a PNG or JPEG (sniffed by magic bytes, not extension) into a
/// float image. Throws IoError on unreadable or unsupported files.
ImageBuffer load_image(const std::string& path);

/// Writes an 8-bit RGB PNG with fixed encoder settings, so equal pixels
/// always produce equal bytes.
void save_png(const std::string& path, const ImageBuffer& image);

}  // namespace regionedit::cli
