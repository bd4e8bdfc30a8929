#pragma once

#include "ssk/bounds.hpp"
#include "ssk/certificates.hpp"
#include "ssk/config.hpp"
#include "ssk/ensemble.hpp"
#include "ssk/errors.hpp"
#include "ssk/generator.hpp"
#include "ssk/harness.hpp"
#include "ssk/linalg.hpp"
#include "ssk/models.hpp"
#include "ssk/noise.hpp"
#include "ssk/qp.hpp"
#include "ssk/report.hpp"
#include "ssk/sde.hpp"
#include "ssk/stats.hpp"
