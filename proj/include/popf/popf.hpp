#pragma once

#include "popf/calibration.hpp"
#include "popf/core.hpp"
#include "popf/eval.hpp"
#include "popf/io.hpp"
#include "popf/opf.hpp"
#include "popf/optim.hpp"
