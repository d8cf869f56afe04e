/*
 * holo: simulation and Fourier off-axis reconstruction of photon-counting
 * interferograms.
 *
 * Every function returns a holo_status. On failure, holo_last_error() gives a
 * thread-local message and holo_last_error_stage() the pipeline stage that
 * failed (empty when not applicable). Objects are opaque handles released
 * with the matching *_free function; passing NULL to *_free is a no-op.
 */
#ifndef HOLO_H
#define HOLO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(HOLO_BUILDING_LIBRARY)
#    define HOLO_API __declspec(dllexport)
#  else
#    define HOLO_API __declspec(dllimport)
#  endif
#else
#  define HOLO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum holo_status {
  HOLO_OK = 0,
  HOLO_E_INVALID_ARGUMENT = 1,
  HOLO_E_CONFIG = 2,
  HOLO_E_DIMENSION = 3,
  HOLO_E_NO_SIDEBAND = 4,
  HOLO_E_EMPTY_REFERENCE = 5,
  HOLO_E_SELECTION = 6,
  HOLO_E_FIT = 7,
  HOLO_E_EMPTY_VALIDITY = 8,
  HOLO_E_PIPELINE = 9,
  HOLO_E_IO = 10,
  HOLO_E_FORMAT = 11,
  HOLO_E_INTERNAL = 12
} holo_status;

typedef enum holo_dtype { HOLO_F64 = 0, HOLO_C128 = 1, HOLO_U32 = 2 } holo_dtype;

typedef enum holo_axis {
  HOLO_AXIS_COLUMNS = 0, /* average a column range; profile versus y */
  HOLO_AXIS_ROWS = 1     /* average a row range; profile versus x */
} holo_axis;

typedef struct holo_config holo_config;
typedef struct holo_map holo_map;
typedef struct holo_events holo_events;
typedef struct holo_recon holo_recon;
typedef struct holo_profile holo_profile;

HOLO_API const char* holo_version(void);
HOLO_API const char* holo_last_error(void);
HOLO_API const char* holo_last_error_stage(void);
HOLO_API const char* holo_status_name(holo_status status);

/* ---- configuration ---------------------------------------------------- */

HOLO_API holo_status holo_config_parse(const char* text, holo_config** out);
HOLO_API holo_status holo_config_load(const char* path, holo_config** out);
HOLO_API void holo_config_free(holo_config* cfg);
/* FNV-1a 64 of the config source text. */
HOLO_API uint64_t holo_config_hash(const holo_config* cfg);
/* Copy of cfg with the phase mask removed (calibration run). */
HOLO_API holo_status holo_config_reference(const holo_config* cfg, holo_config** out);
/* Number of recognised keys and the i-th key name. */
HOLO_API size_t holo_config_key_count(void);
HOLO_API const char* holo_config_key(size_t index);
/* Writes the parsed config as a JSON object (keys as given). Returns the
 * required buffer length including the terminator. */
HOLO_API size_t holo_config_json(const holo_config* cfg, char* buf, size_t len);

/* ---- maps (HG2D files) ------------------------------------------------ */

HOLO_API holo_status holo_map_create(holo_dtype dtype, uint32_t width, uint32_t height, double pitch,
                                     const char* channel, holo_map** out);
HOLO_API holo_status holo_map_read(const char* path, holo_map** out);
HOLO_API holo_status holo_map_write(const holo_map* map, const char* path);
HOLO_API void holo_map_free(holo_map* map);
HOLO_API holo_dtype holo_map_dtype(const holo_map* map);
HOLO_API uint32_t holo_map_width(const holo_map* map);
HOLO_API uint32_t holo_map_height(const holo_map* map);
HOLO_API double holo_map_pitch(const holo_map* map);
HOLO_API const char* holo_map_channel(const holo_map* map);
/* Raw row-major payload: double*, double[2]* or uint32_t* depending on dtype. */
HOLO_API void* holo_map_data(holo_map* map);
HOLO_API const void* holo_map_data_const(const holo_map* map);

/* ---- events ----------------------------------------------------------- */

HOLO_API holo_status holo_events_read(const char* path, holo_events** out);
/* precision: significant digits (6..17); 0 selects the default of 9. */
HOLO_API holo_status holo_events_write(const holo_events* events, const char* path, int precision);
HOLO_API void holo_events_free(holo_events* events);
HOLO_API size_t holo_events_count(const holo_events* events);
/* Histogram onto a width x height grid; out-of-bounds events are tallied. */
HOLO_API holo_status holo_events_histogram(const holo_events* events, double pitch, holo_map** out,
                                           uint64_t* discarded);

/* ---- simulation ------------------------------------------------------- */

/* Simulates n_events expected signal photons plus configured noise. Either
 * output pointer may be NULL when that product is not wanted. */
HOLO_API holo_status holo_simulate(const holo_config* cfg, double n_events, uint64_t seed,
                                   holo_events** events_out, holo_map** interferogram_out);
/* Seed used for the calibration run derived from a main-run seed. */
HOLO_API uint64_t holo_reference_seed(uint64_t seed);

/* ---- reconstruction --------------------------------------------------- */

typedef struct holo_recon_params {
  double dc_exclusion_radius; /* rad/m; 0 = 10% of Nyquist */
  double radius_fraction;     /* sideband radius / distance to DC */
  double taper_fraction;      /* raised-cosine width / radius */
  double amplitude_floor;     /* validity threshold relative to max |p| */
  int conjugate;              /* nonzero: use the mirrored sideband */
  int has_sideband;           /* nonzero: use sideband_kx/ky instead of locating */
  double sideband_kx;         /* rad/m */
  double sideband_ky;
} holo_recon_params;

HOLO_API void holo_recon_params_default(holo_recon_params* params);

/* interferogram and reference must be U32 or F64 maps; reference may be NULL. */
HOLO_API holo_status holo_reconstruct(const holo_map* interferogram, const holo_map* reference,
                                      const holo_recon_params* params, holo_recon** out);
HOLO_API void holo_recon_free(holo_recon* recon);
/* Phase (F64, NaN outside validity), cross amplitude (F64), DC intensity
 * (F64) and validity (U32 0/1) as new maps. */
HOLO_API holo_status holo_recon_phase(const holo_recon* recon, holo_map** out);
HOLO_API holo_status holo_recon_amplitude(const holo_recon* recon, holo_map** out);
HOLO_API holo_status holo_recon_dc(const holo_recon* recon, holo_map** out);
HOLO_API holo_status holo_recon_validity(const holo_recon* recon, holo_map** out);
HOLO_API void holo_recon_sideband(const holo_recon* recon, double* kx, double* ky, double* radius,
                                  double* taper);
/* Median visibility over validity and fraction of clipped pixels. */
HOLO_API holo_status holo_recon_visibility(const holo_recon* recon, double* median, double* clip_fraction);
/* JSON summary; returns required length including the terminator. */
HOLO_API size_t holo_recon_summary_json(const holo_recon* recon, char* buf, size_t len);

/* ---- statistics ------------------------------------------------------- */

HOLO_API holo_status holo_bootstrap(const holo_map* interferogram, const holo_map* reference,
                                    const holo_recon_params* params, int n_resamples, uint64_t seed,
                                    holo_map** mean_out, holo_map** std_out);

/* begin/end < 0 selects the middle 50 lines. std may be NULL. */
HOLO_API holo_status holo_band_average(const holo_map* phase, const holo_map* std, holo_axis axis,
                                       int begin, int end, holo_profile** out);
/* Center in pixel indices; negative center selects the grid center. */
HOLO_API holo_status holo_azimuthal_profile(const holo_map* phase, double center_x, double center_y,
                                            double r_inner, double r_outer, int n_bins,
                                            holo_profile** out);
HOLO_API void holo_profile_free(holo_profile* profile);
HOLO_API size_t holo_profile_length(const holo_profile* profile);
/* Copies the i-th sample; returns 0 when the sample is invalid. */
HOLO_API int holo_profile_sample(const holo_profile* profile, size_t i, double* abscissa, double* value,
                                 double* error);
/* Returns 0 when no fit is available. */
HOLO_API int holo_profile_fit(const holo_profile* profile, double* slope, double* slope_error,
                              double* intercept, double* residual_rms);
/* CSV "abscissa,value,error"; invalid samples are skipped. */
HOLO_API holo_status holo_profile_write_csv(const holo_profile* profile, const char* path);
/* Compares with the config's mask phase along the profile; fits a constant only. */
HOLO_API holo_status holo_compare_theory(const holo_profile* profile, const holo_config* model,
                                         holo_axis axis, double* rms, double* max_error, double* offset);

#ifdef __cplusplus
}
#endif

#endif /* HOLO_H */
