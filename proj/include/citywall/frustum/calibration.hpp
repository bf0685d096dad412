#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "citywall/frustum/frustum.hpp"

namespace citywall::frustum {

struct CalibrationRegion {
  std::string region_id;
  int x_resolution = 0;
  int y_resolution = 0;
  FrustumAngles angles;
};

// Reads the region/frustum subset of an MPCDI-style XML document:
//
//   <anyRoot>
//     <region id="r1" xResolution="2560" yResolution="1600">
//       <frustum><yaw/><pitch/><roll/>
//                <rightAngle/><leftAngle/><upAngle/><downAngle/></frustum>
//     </region>
//   </anyRoot>
//
// Regions may be nested at any depth (real files wrap them in display/buffer
// elements); they are returned in document order. Warp and blend data is
// ignored.
//
// Errors: ParseError for malformed XML or non-numeric values,
// UnsupportedProfile when no region exists or a region lacks its frustum or
// any of the seven angle elements, AngleOutOfRange for angles the frustum
// cannot represent.
std::vector<CalibrationRegion> parse_calibration(std::string_view document);

}  // namespace citywall::frustum
