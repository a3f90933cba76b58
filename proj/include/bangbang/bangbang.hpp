#pragma once

#include "bangbang/brownian.hpp"
#include "bangbang/coupling.hpp"
#include "bangbang/dpsolver.hpp"
#include "bangbang/oracle.hpp"
#include "bangbang/quadrature.hpp"
#include "bangbang/rational.hpp"
#include "bangbang/rewards.hpp"
#include "bangbang/rng.hpp"
#include "bangbang/walkdist.hpp"
