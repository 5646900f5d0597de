// locdil - dilation theory on locally Hilbert spaces
//
// Umbrella header.

#pragma once

#include "locdil/applications.hpp"
#include "locdil/core.hpp"
#include "locdil/dilation.hpp"
#include "locdil/local_operator.hpp"
#include "locdil/parallel.hpp"
#include "locdil/pd_kernel.hpp"
#include "locdil/star_semigroup.hpp"
#include "locdil/tower.hpp"
