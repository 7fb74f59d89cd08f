#pragma once

#include "dtc/bench.hpp"
#include "dtc/c_interpreter.hpp"
#include "dtc/determinize.hpp"
#include "dtc/dot_reader.hpp"
#include "dtc/error.hpp"
#include "dtc/export.hpp"
#include "dtc/ingest.hpp"
#include "dtc/learner.hpp"
#include "dtc/model.hpp"
#include "dtc/predicates.hpp"
#include "dtc/runtime.hpp"
#include "dtc/scoring.hpp"
#include "dtc/verify.hpp"
