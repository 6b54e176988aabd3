#pragma once

#include "psls/blockmat.hpp"
#include "psls/check.hpp"
#include "psls/error.hpp"
#include "psls/io.hpp"
#include "psls/language.hpp"
#include "psls/sim.hpp"
#include "psls/sls.hpp"
#include "psls/solver/eq_qp.hpp"
#include "psls/solver/lp.hpp"
#include "psls/solver/status.hpp"
#include "psls/synth.hpp"
#include "psls/system.hpp"
