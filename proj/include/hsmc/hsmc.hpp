#pragma once

#include "hsmc/bounds.hpp"
#include "hsmc/checker.hpp"
#include "hsmc/conp.hpp"
#include "hsmc/descriptor.hpp"
#include "hsmc/error.hpp"
#include "hsmc/formula.hpp"
#include "hsmc/kripke.hpp"
#include "hsmc/oracle.hpp"
#include "hsmc/reductions.hpp"
#include "hsmc/state_set.hpp"
#include "hsmc/summary.hpp"
#include "hsmc/unravel.hpp"
