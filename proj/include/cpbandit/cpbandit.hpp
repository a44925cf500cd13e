#pragma once

#include "cpbandit/baseline.hpp"
#include "cpbandit/complexity.hpp"
#include "cpbandit/detect.hpp"
#include "cpbandit/environment.hpp"
#include "cpbandit/harness.hpp"
#include "cpbandit/jumps.hpp"
#include "cpbandit/lcp.hpp"
#include "cpbandit/random.hpp"
#include "cpbandit/shb.hpp"
#include "cpbandit/verify.hpp"
