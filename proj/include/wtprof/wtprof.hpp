#pragma once

// Umbrella header.

#include "wtprof/error.hpp"
#include "wtprof/logdata.hpp"
#include "wtprof/synth.hpp"
#include "wtprof/features.hpp"
#include "wtprof/kernels.hpp"
#include "wtprof/smo.hpp"
#include "wtprof/ocsvm.hpp"
#include "wtprof/svdd.hpp"
#include "wtprof/model.hpp"
#include "wtprof/parallel.hpp"
#include "wtprof/evaluation.hpp"
#include "wtprof/novelty.hpp"
#include "wtprof/identify.hpp"
#include "wtprof/commands.hpp"
