#pragma once

#include "scatterid/error.hpp"
#include "scatterid/specfun.hpp"
#include "scatterid/geometry.hpp"
#include "scatterid/bie.hpp"
#include "scatterid/coefficients.hpp"
#include "scatterid/farfield.hpp"
#include "scatterid/acquisition.hpp"
#include "scatterid/identify.hpp"
#include "scatterid/io.hpp"
