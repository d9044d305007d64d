#pragma once

#include "gravinv/types.hpp"
#include "gravinv/mesh.hpp"
#include "gravinv/forward.hpp"
#include "gravinv/randsvd.hpp"
#include "gravinv/regparam.hpp"
#include "gravinv/system.hpp"
#include "gravinv/irls.hpp"
#include "gravinv/lsqr.hpp"
#include "gravinv/synthetics.hpp"
#include "gravinv/io.hpp"
