#pragma once

#include <string>

#include "lgr/lwr.hpp"
#include "lgr/model.hpp"

namespace lgr {

/// Versioned JSON model dumps. All floating-point fields round-trip
/// value-exactly. The type tag distinguishes "lgr" from "lwr" files.

void save_model(const std::string& path, const LGRModel& model);
void save_model(const std::string& path, const LWRModel& model);

/// Type tag of a model file without loading it fully ("lgr" or "lwr").
std::string model_file_type(const std::string& path);

LGRModel load_lgr_model(const std::string& path);
LWRModel load_lwr_model(const std::string& path);

}  // namespace lgr
