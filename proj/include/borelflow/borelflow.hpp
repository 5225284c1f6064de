// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_BORELFLOW_HPP
#define BORELFLOW_BORELFLOW_HPP

#include "borelflow/bessel.hpp"
#include "borelflow/estimates.hpp"
#include "borelflow/field.hpp"
#include "borelflow/grid.hpp"
#include "borelflow/lattice.hpp"
#include "borelflow/march.hpp"
#include "borelflow/norms.hpp"
#include "borelflow/params.hpp"
#include "borelflow/reconstruct.hpp"
#include "borelflow/taylor.hpp"

#endif
