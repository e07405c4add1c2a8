/** Live-update subscription over the service's event stream.
 *
 * Delivery is at-least-once; the cursor deduplicates by sequence number so
 * replays and reconnects never double-apply an event.
 */

import type { FeedEventDoc } from "./types.js";

export class FeedCursor {
  private last: number;

  constructor(fromSeq = 0) {
    this.last = fromSeq;
  }

  get lastSeq(): number {
    return this.last;
  }

  /** True exactly when the event is new; advances the cursor when it is. */
  accept(event: FeedEventDoc): boolean {
    if (event.seq <= this.last) {
      return false;
    }
    this.last = event.seq;
    return true;
  }

  acceptAll(events: FeedEventDoc[]): FeedEventDoc[] {
    return events.filter((event) => this.accept(event));
  }
}

export interface FeedSubscription {
  close(): void;
}

/** Subscribe via server-sent events; reconnection is native to EventSource. */
export function subscribeFeed(
  streamUrl: string,
  cursor: FeedCursor,
  onEvent: (event: FeedEventDoc) => void,
  onError?: (error: unknown) => void,
): FeedSubscription {
  const source = new EventSource(streamUrl);
  const kinds = ["snapshot_recorded", "phase_changed", "baseline_set", "decision_recorded"];
  const handler = (message: MessageEvent) => {
    try {
      const event = JSON.parse(message.data as string) as FeedEventDoc;
      if (cursor.accept(event)) {
        onEvent(event);
      }
    } catch (error) {
      onError?.(error);
    }
  };
  for (const kind of kinds) {
    source.addEventListener(kind, handler as EventListener);
  }
  source.onerror = (error) => onError?.(error);
  return { close: () => source.close() };
}
