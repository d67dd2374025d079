#pragma once

#include "dist_algebra.hpp"
#include "formal_characters.hpp"
#include "matrix.hpp"
#include "padic_core.hpp"
#include "principal_series.hpp"
#include "pro_p_groups.hpp"
#include "straightening.hpp"
