// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmd/bregman.hpp"
#include "dmd/descent.hpp"
#include "dmd/errors.hpp"
#include "dmd/generating_function.hpp"
#include "dmd/inverse.hpp"
#include "dmd/link_family.hpp"
#include "dmd/problems.hpp"
#include "dmd/rng.hpp"
#include "dmd/simplex.hpp"
