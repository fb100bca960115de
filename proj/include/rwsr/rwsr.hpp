#pragma once

#include "rwsr/codec.hpp"
#include "rwsr/config.hpp"
#include "rwsr/degrade.hpp"
#include "rwsr/error.hpp"
#include "rwsr/image.hpp"
#include "rwsr/kernels.hpp"
#include "rwsr/losses.hpp"
#include "rwsr/metrics.hpp"
#include "rwsr/mor.hpp"
#include "rwsr/noise.hpp"
#include "rwsr/random.hpp"
