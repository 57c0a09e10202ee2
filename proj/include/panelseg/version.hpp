#pragma once

#define PANELSEG_VERSION "0.1.0"
