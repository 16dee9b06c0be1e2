#pragma once

// umbrella header

#include "ffcm/charsum.hpp"
#include "ffcm/cli.hpp"
#include "ffcm/config.hpp"
#include "ffcm/counter.hpp"
#include "ffcm/cubic_form.hpp"
#include "ffcm/cyclotomic.hpp"
#include "ffcm/density.hpp"
#include "ffcm/expsum.hpp"
#include "ffcm/factor.hpp"
#include "ffcm/field.hpp"
#include "ffcm/geometry.hpp"
#include "ffcm/laurent.hpp"
#include "ffcm/poly.hpp"
#include "ffcm/serialize.hpp"
