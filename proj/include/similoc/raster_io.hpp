#pragma once

#include <string>

#include "similoc/raster.hpp"

namespace similoc {

// Raster files: 3-channel rasters as binary PPM (P6, maxval 255),
// single-channel rasters as binary PGM (P5, maxval 65535, big-endian),
// values quantized as round(v * maxval). Every raster has a "<name>.geo"
// text sidecar (origin_easting / origin_northing / resolution lines) and,
// when a hole mask exists, a "<name>.holes" PGM (P5, maxval 255, 255=hole).
// Sidecar names replace the raster's extension.

void save_raster(const GeoRaster& raster, const std::string& path);
GeoRaster load_raster(const std::string& path);

std::string sidecar_path(const std::string& raster_path, const std::string& ext);

}  // namespace similoc
