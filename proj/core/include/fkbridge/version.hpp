#pragma once

namespace fkbridge {

/// "0.1.0 (<git revision>)" — baked at configure time so run manifests
/// identify the exact build.
const char* version_string();

}  // namespace fkbridge
