/** Payload shapes of the engine's HTTP JSON API. */

export interface Poi {
  poi_id: number;
  lat: number;
  lon: number;
  category: string;
}

export interface PoisResponse {
  dataset: string;
  pois: Poi[];
}

export interface HealthResponse {
  status: string;
  dataset: string;
  n_pois: number;
  l_max: number;
}

export type Method = "lstm" | "sampler";

/** JSON constraints document as the service accepts it. */
export interface ConstraintsDoc {
  must_see?: number[];
  budget?: { limit: number };
  time?: {
    start?: number;
    limit?: number;
    stay_default?: number;
  };
}

export interface RecommendRequest {
  s: number;
  d: number;
  k: number;
  L?: number;
  method: Method;
  constraints?: ConstraintsDoc;
  seed?: number;
  iterations?: number;
}

export interface ItineraryPayload {
  pois: number[];
  perplexity: number | null;
  prominent: number;
}

export interface RecommendResponse {
  itineraries: ItineraryPayload[];
  seed: number;
  method: string;
  elapsed_seconds: number;
}

export interface ValidateRequest {
  constraints: ConstraintsDoc;
  itinerary?: number[];
}

export interface ValidateResponse {
  ok: boolean;
  violations: string[];
  summary: {
    must_see: number[];
    has_budget: boolean;
    has_time: boolean;
  };
}

/** Error body the service returns with 4xx/5xx statuses. */
export interface ApiErrorPayload {
  code: string;
  message: string;
}

/** Normalized error the client hands to the view layer. */
export interface ApiError {
  status: number;
  code: string;
  message: string;
}
