export type View = "front" | "side";
export type Label = "alignment" | "addition" | "erosion";

export type Point2 = [number, number];

export interface StrokePairDoc {
  id: string;
  part: string;
  label: Label;
  primary_view: View;
  attach_id: string | null;
  marking: string | null;
  front: Point2[];
  side: Point2[];
}

export interface ValidationDoc {
  ok: boolean;
  watertight: boolean;
  manifold: boolean;
  oriented: boolean;
  [key: string]: boolean | number;
}

export interface PartDiagnosticsDoc {
  id: string;
  status: "ok" | "failed";
  error: string | null;
  objective_before: number | null;
  objective_after: number | null;
  validation: ValidationDoc | null;
}

export interface MeshDoc {
  id: string;
  provenance: string;
  vertices: [number, number, number][];
  triangles: [number, number, number][];
  diagnostics: PartDiagnosticsDoc;
  revision_built?: number;
}

export interface SceneDoc {
  revision: number;
  parts: MeshDoc[];
}

export interface StrokeRecordDoc {
  id: string;
  view: View;
  label: Label;
  attach_id: string | null;
  marking: string | null;
  points: Point2[];
}

export interface ProjectDoc {
  version: number;
  images: Record<View, unknown>;
  parts: { id: string; name: string; strokes: StrokeRecordDoc[] }[];
  counters: { part: number; stroke: number };
}

export function otherView(view: View): View {
  return view === "front" ? "side" : "front";
}
