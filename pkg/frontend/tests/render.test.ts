import { describe, expect, it } from "vitest";

import { fitViewport, project } from "../src/geo.js";
import { buildResultView, errorText, routeColor } from "../src/render.js";
import type { Poi, RecommendResponse } from "../src/types.js";

const POIS: Poi[] = Array.from({ length: 10 }, (_, i) => ({
  poi_id: i,
  lat: 40.7 + 0.004 * i,
  lon: -74.0 + 0.003 * ((i * 3) % 10),
  category: `kind${i}`,
}));
const CATALOG = new Map(POIS.map((p) => [p.poi_id, p]));
const VIEW = fitViewport(POIS, 800, 600);

const RESPONSE: RecommendResponse = {
  itineraries: [
    { pois: [0, 7, 3, 9], perplexity: 6.25, prominent: 7 },
    { pois: [0, 3, 5, 9], perplexity: 7.5, prominent: 3 },
    { pois: [0, 5, 7, 9], perplexity: null, prominent: 5 },
  ],
  seed: 42,
  method: "sampler",
  elapsed_seconds: 0.034,
};

describe("buildResultView", () => {
  it("keeps the response order exactly, with no reordering", () => {
    const view = buildResultView(RESPONSE, CATALOG, [], VIEW);
    expect(view.routes.map((r) => r.poiIds)).toEqual([
      [0, 7, 3, 9],
      [0, 3, 5, 9],
      [0, 5, 7, 9],
    ]);
    expect(view.routes.map((r) => r.index)).toEqual([0, 1, 2]);
    view.routes.forEach((route) => {
      const vertices = route.points.split(" ");
      expect(vertices).toHaveLength(route.poiIds.length);
      route.poiIds.forEach((id, i) => {
        const { x, y } = project(CATALOG.get(id)!, VIEW);
        expect(vertices[i]).toBe(`${x.toFixed(1)},${y.toFixed(1)}`);
      });
    });
  });

  it("gives every itinerary its own color", () => {
    const view = buildResultView(RESPONSE, CATALOG, [], VIEW);
    const colors = new Set(view.routes.map((r) => r.color));
    expect(colors.size).toBe(view.routes.length);
  });

  it("flags must-see markers and lists them per route", () => {
    const view = buildResultView(RESPONSE, CATALOG, [7], VIEW);
    const marker = view.markers.find((m) => m.poiId === 7)!;
    expect(marker.mustSee).toBe(true);
    expect(view.markers.filter((m) => m.mustSee)).toHaveLength(1);
    expect(view.routes[0].mustSeeOnRoute).toEqual([7]);
    expect(view.routes[1].mustSeeOnRoute).toEqual([]);
    expect(view.routes[2].mustSeeOnRoute).toEqual([7]);
    expect(marker.onRoutes).toEqual([0, 2]);
  });

  it("marks start and end markers from the routes", () => {
    const view = buildResultView(RESPONSE, CATALOG, [], VIEW);
    expect(view.markers.find((m) => m.poiId === 0)?.isStart).toBe(true);
    expect(view.markers.find((m) => m.poiId === 9)?.isEnd).toBe(true);
    expect(view.markers.find((m) => m.poiId === 3)?.isStart).toBe(false);
  });

  it("renders a perplexity label, with a placeholder for missing values", () => {
    const view = buildResultView(RESPONSE, CATALOG, [], VIEW);
    expect(view.routes[0].perplexityText).toBe("perplexity 6.250");
    expect(view.routes[2].perplexityText).toBe("perplexity n/a");
    expect(view.seedText).toBe("seed 42");
  });

  it("rejects responses naming POIs missing from the catalog", () => {
    const bad: RecommendResponse = {
      ...RESPONSE,
      itineraries: [{ pois: [0, 404, 9], perplexity: 1, prominent: 404 }],
    };
    expect(() => buildResultView(bad, CATALOG, [], VIEW)).toThrow(/404/);
  });
});

describe("routeColor", () => {
  it("is distinct for at least the first twenty itineraries", () => {
    const colors = new Set(Array.from({ length: 20 }, (_, i) => routeColor(i)));
    expect(colors.size).toBe(20);
  });

  it("is stable for an index", () => {
    expect(routeColor(4)).toBe(routeColor(4));
  });
});

describe("errorText", () => {
  it("explains infeasible constraints inline", () => {
    const text = errorText({
      code: "infeasible_constraints",
      message: "no feasible seed within 100 attempts",
    });
    expect(text).toContain("Infeasible constraints");
    expect(text).toContain("no feasible seed");
  });

  it("stays silent for superseded submissions", () => {
    expect(errorText({ code: "superseded", message: "replaced" })).toBe("");
  });

  it("prints other service errors verbatim", () => {
    expect(errorText({ code: "unknown_poi", message: "poi_id 404" })).toBe(
      "unknown poi: poi_id 404",
    );
  });
});
