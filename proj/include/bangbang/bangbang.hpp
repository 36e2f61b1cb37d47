// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "bangbang/error.hpp"
#include "bangbang/ergodic.hpp"
#include "bangbang/evolution.hpp"
#include "bangbang/matrix.hpp"
#include "bangbang/optimizer.hpp"
#include "bangbang/schedule.hpp"
