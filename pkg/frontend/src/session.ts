// UI session state machine: one in-flight request at a time, every
// change round-trips through POST /events, and the rendered state is
// always the most recently acknowledged server state.

import { ApiClient, ApiError, GeometryDoc, StateDoc } from "./api.js";

export const KEYS = ["P", "F", "C", "S", "L", "V", "R"] as const;
export type Key = (typeof KEYS)[number];

const KEY_EVENTS: Record<Key, { type: string; args?: Record<string, unknown> }> = {
  P: { type: "AddPost" },
  F: { type: "AddFriend" },
  C: { type: "AddComment", args: { post: "RANDOM" } },
  S: { type: "AddShare", args: { post: "RANDOM" } },
  L: { type: "LikeAll" },
  V: { type: "ViewAll" },
  R: { type: "Prune" },
};

export interface UiState {
  state: StateDoc | null;
  geometry: GeometryDoc | null;
  pending: boolean;
  lastPrunedIds: number[];
  notice: string | null;
}

export class UiSession {
  state: UiState = {
    state: null,
    geometry: null,
    pending: false,
    lastPrunedIds: [],
    notice: null,
  };

  constructor(
    private client: ApiClient,
    private onChange: (s: UiState) => void = () => {},
  ) {}

  private emit() {
    this.onChange(this.state);
  }

  async refresh(): Promise<void> {
    const [state, geometry] = await Promise.all([
      this.client.getState(),
      this.client.getGeometry(),
    ]);
    this.state = { ...this.state, state, geometry };
    this.emit();
  }

  /** Send the event for one key press; returns false when a request is
   * already in flight (the press is dropped, not queued). */
  async press(key: Key, threshold = 50): Promise<boolean> {
    if (this.state.pending) return false;
    const spec = KEY_EVENTS[key];
    const args =
      key === "R" ? { threshold } : spec.args ?? {};
    this.state = { ...this.state, pending: true, notice: null };
    this.emit();
    try {
      const res = await this.client.postEvent(spec.type, args);
      this.state = {
        ...this.state,
        lastPrunedIds: res.prunedIds ?? [],
      };
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError) {
        this.state = {
          ...this.state,
          notice:
            err.status === 409 ? "no posts yet" : `error: ${err.message}`,
        };
      } else {
        this.state = { ...this.state, notice: "network failure; retry" };
      }
    } finally {
      this.state = { ...this.state, pending: false };
      this.emit();
    }
    return true;
  }
}
