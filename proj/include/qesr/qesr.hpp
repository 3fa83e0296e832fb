#pragma once

#include "qesr/units.hpp"
#include "qesr/errors.hpp"
#include "qesr/io.hpp"
#include "qesr/spin_model.hpp"
#include "qesr/pulse.hpp"
#include "qesr/dynamics.hpp"
#include "qesr/contour.hpp"
#include "qesr/propagate.hpp"
#include "qesr/parallel.hpp"
#include "qesr/protocol.hpp"
#include "qesr/sensitivity.hpp"
