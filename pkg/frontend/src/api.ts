/**
 * Typed client for the session service.
 *
 * All mutating calls are funneled through a single queue so at most one is in
 * flight, and each carries the revision we believe is current; the service
 * answers 409 if we are stale, which surfaces as ApiError for the caller to
 * resync.
 */

import type {
  Label,
  MeshDoc,
  Point2,
  ProjectDoc,
  SceneDoc,
  StrokePairDoc,
  View,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

interface ImageUpload {
  png_base64?: string;
  path?: string;
  scale?: number;
  offset?: Point2;
}

export class SessionClient {
  sessionId = "";
  revision = 0;
  private queue: Promise<unknown> = Promise.resolve();

  constructor(readonly baseUrl: string) {}

  private async request(
    method: "GET" | "POST",
    path: string,
    body?: Record<string, unknown>,
  ): Promise<Record<string, unknown>> {
    const resp = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: { "Content-Type": "application/json" },
      body: method === "POST" ? JSON.stringify(body ?? {}) : undefined,
    });
    const doc = (await resp.json()) as Record<string, unknown>;
    if (!resp.ok) {
      throw new ApiError(resp.status, String(doc.error ?? resp.statusText));
    }
    return doc;
  }

  /** Serialize mutating requests and track the revision from each response. */
  private mutate(
    path: string,
    body: Record<string, unknown> = {},
  ): Promise<Record<string, unknown>> {
    const run = this.queue.then(async () => {
      const doc = await this.request("POST", path, {
        ...body,
        revision: this.revision,
      });
      this.revision = Number(doc.revision);
      return doc;
    });
    // keep the queue alive after failures
    this.queue = run.catch(() => undefined);
    return run;
  }

  async create(): Promise<void> {
    const doc = await this.request("POST", "/v1/session");
    this.sessionId = String(doc.session_id);
    this.revision = Number(doc.revision);
  }

  private s(path: string): string {
    return `/v1/session/${this.sessionId}${path}`;
  }

  async uploadImages(front: ImageUpload, side: ImageUpload): Promise<void> {
    await this.mutate(this.s("/images"), { front, side });
  }

  async addStroke(
    view: View,
    points: Point2[],
    label: Label,
    part: string,
    attachId?: string,
  ): Promise<StrokePairDoc> {
    const doc = await this.mutate(this.s("/stroke"), {
      view,
      points,
      label,
      part,
      attach_id: attachId ?? null,
    });
    return doc.pair as unknown as StrokePairDoc;
  }

  async moveKeyPoint(
    strokeId: string,
    index: number,
    pos: Point2,
    locked: boolean,
    view?: View,
  ): Promise<StrokePairDoc> {
    const doc = await this.mutate(this.s(`/stroke/${strokeId}/move`), {
      index,
      pos,
      locked,
      view: view ?? null,
    });
    return doc.pair as unknown as StrokePairDoc;
  }

  async deleteStroke(strokeId: string): Promise<void> {
    await this.mutate(this.s(`/stroke/${strokeId}/delete`));
  }

  async relocateStroke(strokeId: string): Promise<StrokePairDoc> {
    const doc = await this.mutate(this.s(`/stroke/${strokeId}/relocate`));
    return doc.pair as unknown as StrokePairDoc;
  }

  async undo(): Promise<boolean> {
    const doc = await this.mutate(this.s("/undo"));
    return Boolean(doc.undone);
  }

  async setLock(locked: boolean): Promise<void> {
    await this.mutate(this.s("/lock"), { locked });
  }

  async reconstructPart(partId: string): Promise<MeshDoc> {
    const doc = await this.request(
      "POST",
      this.s(`/reconstruct/${partId}`),
      {},
    );
    return doc.part as unknown as MeshDoc;
  }

  async getScene(): Promise<SceneDoc> {
    return (await this.request(
      "GET",
      this.s("/scene"),
    )) as unknown as SceneDoc;
  }

  async save(): Promise<ProjectDoc> {
    const doc = await this.request("POST", this.s("/save"), {});
    return doc.project as unknown as ProjectDoc;
  }

  async load(project: ProjectDoc): Promise<void> {
    await this.mutate(this.s("/load"), { project });
  }

  async sceneObjText(): Promise<string> {
    const resp = await fetch(`${this.baseUrl}${this.s("/scene.obj")}`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.text();
  }
}
