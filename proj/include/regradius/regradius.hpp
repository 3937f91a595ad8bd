#pragma once

#include "regradius/error.hpp"
#include "regradius/linalg.hpp"
#include "regradius/spaces.hpp"
#include "regradius/minnorm.hpp"
#include "regradius/bump.hpp"
#include "regradius/perturbation_function.hpp"
#include "regradius/mappings.hpp"
#include "regradius/moduli.hpp"
#include "regradius/perturbation.hpp"
#include "regradius/radius.hpp"
#include "regradius/oracles.hpp"
#include "regradius/serialize.hpp"
#include "regradius/experiment.hpp"
