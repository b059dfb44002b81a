#pragma once

#include <string_view>

// Text files compiled into the library.
namespace bivmap::resources {

// Synthetic sub-catchment polygons with TSS mean and standard deviation.
std::string_view casestudy_geojson();
// Design request for the sediment case study, including its three schemes.
std::string_view casestudy_request();

}  // namespace bivmap::resources
