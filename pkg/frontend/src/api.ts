// JSON client for the tree server. All state lives server-side; the UI
// only posts events and re-fetches.

export interface Status {
  branches: number;
  posts: number;
  friends: number;
}

export interface PostEntry {
  id: number;
  likes: number;
  shares: number;
  views: number;
  comments: number;
}

export interface StateDoc {
  status: Status;
  posts: PostEntry[];
  friends: number[];
}

export interface GeometryDoc {
  segments: { x1: number; y1: number; x2: number; y2: number; kind: string }[];
  markers: { x: number; y: number; kind: string }[];
  labels: { x: number; y: number; text: string }[];
  bounds: { minX: number; minY: number; maxX: number; maxY: number };
}

export interface EventResponse {
  seq: number;
  status: Status;
  prunedIds?: number[];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = await res.json();
        detail = body.detail ?? detail;
      } catch {
        // non-JSON error body; keep statusText
      }
      throw new ApiError(res.status, detail);
    }
    return res.json() as Promise<T>;
  }

  postEvent(
    type: string,
    args: Record<string, unknown> = {},
    actor = "user",
  ): Promise<EventResponse> {
    return this.request<EventResponse>("/events", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ actor, type, args }),
    });
  }

  getState(): Promise<StateDoc> {
    return this.request<StateDoc>("/state");
  }

  getGeometry(): Promise<GeometryDoc> {
    return this.request<GeometryDoc>("/geometry");
  }
}
