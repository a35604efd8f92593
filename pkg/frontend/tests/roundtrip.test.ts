/** Live round trip against a running service.
 *
 * Start one with e.g.
 *   alttrip serve --bundle work/midtown/bundle.bin --bind 127.0.0.1:8123
 * and run ALTTRIP_API=http://127.0.0.1:8123 npm test. Skipped otherwise.
 */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { fitViewport } from "../src/geo.js";
import { buildResultView, errorText } from "../src/render.js";
import {
  buildRequest,
  initialState,
  setEndpoints,
  setShape,
  toggleMustSee,
} from "../src/state.js";
import type { ApiError, Poi } from "../src/types.js";

const API = process.env.ALTTRIP_API;

describe.skipIf(!API)("live service round trip", () => {
  it("renders must-see markers on every route and replays the echoed seed", async () => {
    const client = new ApiClient(API!);
    const { pois } = await client.pois();
    expect(pois.length).toBeGreaterThanOrEqual(4);
    const catalog = new Map<number, Poi>(pois.map((p) => [p.poi_id, p]));
    const catalogIds = new Set(catalog.keys());
    const view = fitViewport(pois, 800, 600);

    const [s, d, m] = [pois[0].poi_id, pois[pois.length - 1].poi_id, pois[2].poi_id];
    let state = setEndpoints(initialState(), s, d);
    state = setShape(state, 3, 5, "sampler");
    state = toggleMustSee(state, m);

    const first = await client.recommend(buildRequest(state, catalogIds));
    expect(first.itineraries).toHaveLength(3);
    const rendered = buildResultView(first, catalog, state.drafts.mustSee, view);
    for (const route of rendered.routes) {
      expect(route.poiIds).toContain(m);
      expect(route.mustSeeOnRoute).toContain(m);
    }
    const marker = rendered.markers.find((mk) => mk.poiId === m)!;
    expect(marker.mustSee).toBe(true);
    expect(marker.onRoutes).toEqual(rendered.routes.map((r) => r.index));

    // Resubmit with the echoed seed: identical polylines.
    state = { ...state, seed: String(first.seed) };
    const again = await client.recommend(buildRequest(state, catalogIds));
    expect(again.seed).toBe(first.seed);
    const replay = buildResultView(again, catalog, state.drafts.mustSee, view);
    expect(replay.routes.map((r) => r.points)).toEqual(
      rendered.routes.map((r) => r.points),
    );
    expect(replay.routes.map((r) => r.poiIds)).toEqual(
      rendered.routes.map((r) => r.poiIds),
    );
  });

  it("maps an impossible budget to the inline infeasible message", async () => {
    const client = new ApiClient(API!);
    const { pois } = await client.pois();
    const catalogIds = new Set(pois.map((p) => p.poi_id));

    let state = setEndpoints(initialState(), pois[0].poi_id, pois[1].poi_id);
    state = setShape(state, 1, null, "sampler");
    state = { ...state, drafts: { ...state.drafts, budgetLimit: "0.000001" } };

    let caught: ApiError | null = null;
    try {
      await client.recommend(buildRequest(state, catalogIds));
    } catch (exc) {
      caught = exc as ApiError;
    }
    expect(caught?.status).toBe(422);
    expect(caught?.code).toBe("infeasible_constraints");
    expect(errorText(caught!)).toContain("Infeasible constraints");
  });
});
