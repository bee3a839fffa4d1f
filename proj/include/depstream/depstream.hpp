#pragma once

#include "depstream/augmented.hpp"
#include "depstream/diagnostics.hpp"
#include "depstream/errors.hpp"
#include "depstream/experiments.hpp"
#include "depstream/kernels.hpp"
#include "depstream/mh.hpp"
#include "depstream/mod_one.hpp"
#include "depstream/normal.hpp"
#include "depstream/slice.hpp"
#include "depstream/streams.hpp"
#include "depstream/targets.hpp"
#include "depstream/validation.hpp"
