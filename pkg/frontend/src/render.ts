/** View models for the map overlay and the results panel.
 *
 * Everything here is pure data: the DOM layer maps these one-to-one onto
 * SVG elements and list items, so the tests can pin the rendering rules
 * (response order preserved, one distinct color per itinerary, must-see
 * markers flagged on every route) without a browser.
 */

import type { Poi, RecommendResponse } from "./types.js";
import { project, Viewport } from "./geo.js";

/** Distinct, stable color for itinerary i (golden-angle hue walk). */
export function routeColor(index: number): string {
  const hue = (index * 137.508) % 360;
  return `hsl(${hue.toFixed(1)} 72% 42%)`;
}

export interface RouteView {
  index: number;
  color: string;
  /** POI ids exactly as the service returned them. */
  poiIds: number[];
  /** SVG polyline points attribute, one vertex per POI in response order. */
  points: string;
  perplexity: number | null;
  perplexityText: string;
  prominent: number;
  /** Must-see ids this route contains (all of them, when the draft holds). */
  mustSeeOnRoute: number[];
}

export interface MarkerView {
  poiId: number;
  x: number;
  y: number;
  category: string;
  isStart: boolean;
  isEnd: boolean;
  mustSee: boolean;
  /** Indices of rendered routes passing through this POI. */
  onRoutes: number[];
}

export interface ResultView {
  routes: RouteView[];
  markers: MarkerView[];
  seed: number;
  seedText: string;
  elapsedText: string;
}

function formatPerplexity(value: number | null): string {
  return value === null ? "perplexity n/a" : `perplexity ${value.toFixed(3)}`;
}

/** Build the map and panel models for a response.
 *
 * Order is taken verbatim from the payload: itinerary i keeps position i,
 * and each polyline visits the POIs in exactly the returned sequence.
 */
export function buildResultView(
  response: RecommendResponse,
  catalog: Map<number, Poi>,
  mustSee: readonly number[],
  view: Viewport,
): ResultView {
  const routes: RouteView[] = response.itineraries.map((itin, index) => {
    const points = itin.pois
      .map((id) => {
        const poi = catalog.get(id);
        if (!poi) throw new Error(`response references unknown poi_id ${id}`);
        const { x, y } = project(poi, view);
        return `${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ");
    return {
      index,
      color: routeColor(index),
      poiIds: [...itin.pois],
      points,
      perplexity: itin.perplexity,
      perplexityText: formatPerplexity(itin.perplexity),
      prominent: itin.prominent,
      mustSeeOnRoute: mustSee.filter((id) => itin.pois.includes(id)),
    };
  });

  const onRoutes = new Map<number, number[]>();
  routes.forEach((route) => {
    for (const id of route.poiIds) {
      const bucket = onRoutes.get(id) ?? [];
      bucket.push(route.index);
      onRoutes.set(id, bucket);
    }
  });

  const markers: MarkerView[] = [...catalog.values()].map((poi) => {
    const { x, y } = project(poi, view);
    const routesHere = onRoutes.get(poi.poi_id) ?? [];
    return {
      poiId: poi.poi_id,
      x,
      y,
      category: poi.category,
      isStart: routes.some((r) => r.poiIds[0] === poi.poi_id),
      isEnd: routes.some((r) => r.poiIds[r.poiIds.length - 1] === poi.poi_id),
      mustSee: mustSee.includes(poi.poi_id),
      onRoutes: routesHere,
    };
  });

  return {
    routes,
    markers,
    seed: response.seed,
    seedText: `seed ${response.seed}`,
    elapsedText: `${(response.elapsed_seconds * 1000).toFixed(0)} ms`,
  };
}

/** Inline message for a failed submission. */
export function errorText(error: { code: string; message: string }): string {
  if (error.code === "infeasible_constraints") {
    return `Infeasible constraints: ${error.message}. Loosen the budget or time limit, or drop a must-see POI.`;
  }
  if (error.code === "superseded") {
    return "";
  }
  return `${error.code.replace(/_/g, " ")}: ${error.message}`;
}
