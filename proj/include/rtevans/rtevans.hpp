#pragma once

#include "rtevans/dispersion.hpp"
#include "rtevans/error.hpp"
#include "rtevans/evans.hpp"
#include "rtevans/expansion.hpp"
#include "rtevans/linevolve.hpp"
#include "rtevans/lowdense.hpp"
#include "rtevans/overdense.hpp"
#include "rtevans/params.hpp"
#include "rtevans/profile.hpp"
#include "rtevans/specfun.hpp"
#include "rtevans/spectral.hpp"
#include "rtevans/version.hpp"
