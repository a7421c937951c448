#pragma once

#include "tero/binning.hpp"
#include "tero/checkpoint.hpp"
#include "tero/data.hpp"
#include "tero/date.hpp"
#include "tero/error.hpp"
#include "tero/eval.hpp"
#include "tero/model.hpp"
#include "tero/run_config.hpp"
#include "tero/sidecar.hpp"
#include "tero/training.hpp"
